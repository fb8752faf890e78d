// Example requirements offered at the bottom of the page so a new user
// can start with one click.

export const STARTERS: string[] = [
  "The indoor concentrations of carbon monoxide should be no more than" +
    " 7 mg/m3 in any 24 hours period in all the buildings.",
  "In all the buildings, annual average concentration of tetrachloroethylene" +
    " should be no more than 0.25 mg/m3.",
  "All portable LED Luminaries should have Power Factor of no less than" +
    " 0.70 everywhere.",
  "In all buildings, the average concentration of Bacterial should be" +
    " no more than 2500 cfu/m3 for every day.",
  "The air quality within 3 miles of school A should always be better than" +
    " moderate for the next 2 hours.",
  "The indoor concentrations of carbon monoxide should be no more than" +
    " 7 mg/m3 in any 24 hours period in all the buildings.",
];
