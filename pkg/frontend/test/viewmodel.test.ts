// The three golden conversations, replayed through the view model from
// responses recorded against the live service. The keyword panel must
// mirror each reply's frame field-for-field, and the spec panel may
// fill only once the session is finalized.

import { readFileSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import type { BatchOutcome, FrameView, ReplyPayload } from "../src/api.js";
import {
  applyError,
  applyReply,
  applyUserMessage,
  batchJsonl,
  batchRows,
  frameRows,
  initialViewState,
  startNewRequirement,
  type ViewState,
} from "../src/viewmodel.js";

interface Step {
  sent: string;
  reply: ReplyPayload;
}

function fixture(name: string): Step[] {
  const raw = readFileSync(join(__dirname, "fixtures", name), "utf-8");
  return JSON.parse(raw) as Step[];
}

function replay(steps: Step[]): ViewState[] {
  let state = { ...initialViewState(), sessionId: "s1" };
  const snapshots: ViewState[] = [];
  for (const step of steps) {
    state = applyUserMessage(state, step.sent);
    state = applyReply(state, step.reply);
    snapshots.push(state);
  }
  return snapshots;
}

function expectRowsMirrorFrame(state: ViewState, frame: FrameView | null): void {
  const rows = Object.fromEntries(state.frameRows.map((r) => [r.slot, r]));
  expect(state.frameRows.map((r) => r.slot)).toEqual([
    "entity", "quantifier", "location", "time", "condition",
  ]);
  for (const slot of ["entity", "quantifier", "location", "condition"] as const) {
    const view = frame?.[slot];
    if (view && view.text !== null) {
      expect(rows[slot].value).toBe(view.text);
      expect(rows[slot].provenance).toBe(view.provenance);
    } else {
      expect(rows[slot].provenance).toBe("missing");
    }
  }
  const time = frame?.time;
  if (time) {
    expect(rows.time.value).toBe(time.text ?? "always");
    expect(rows.time.provenance).toBe(time.provenance);
  } else {
    expect(rows.time.provenance).toBe("missing");
  }
}

describe("case I: interactive completion", () => {
  const steps = fixture("case1.json");

  it("fills the keyword panel from the reply and the spec only after yes", () => {
    const [afterRequirement, afterYes] = replay(steps);

    expectRowsMirrorFrame(afterRequirement, steps[0].reply.frame);
    expect(afterRequirement.spec).toBeNull();
    expect(afterRequirement.state).toBe("awaiting_confirmation");

    expect(afterYes.state).toBe("finalized");
    expect(afterYes.spec).not.toBeNull();
    expect(afterYes.spec!.formal).toBe(steps[1].reply.formal);
    expect(afterYes.spec!.friendly).toBe(steps[1].reply.friendly);
  });

  it("panel snapshots stay stable", () => {
    const snapshots = replay(steps).map((s) => ({
      state: s.state,
      frameRows: s.frameRows,
      spec: s.spec,
    }));
    expect(snapshots).toMatchSnapshot();
  });
});

describe("case II: typed correction", () => {
  const steps = fixture("case2.json");

  it("updates the location row in place and demands a second confirmation", () => {
    const [first, corrected, confirmed] = replay(steps);

    const before = Object.fromEntries(first.frameRows.map((r) => [r.slot, r.value]));
    const after = Object.fromEntries(corrected.frameRows.map((r) => [r.slot, r.value]));
    expect(after.location).toBe("all the buildings");
    for (const slot of ["entity", "quantifier", "time", "condition"]) {
      expect(after[slot]).toBe(before[slot]);
    }
    expect(corrected.spec).toBeNull(); // not finalized yet
    expect(confirmed.spec).not.toBeNull();
  });

  it("panel snapshots stay stable", () => {
    expect(
      replay(steps).map((s) => ({ frameRows: s.frameRows, spec: s.spec })),
    ).toMatchSnapshot();
  });
});

describe("case III: clarification, memory, learning", () => {
  const steps = fixture("case3.json");

  it("walks clarification -> confirmation -> memory hit -> finalized", () => {
    const states = replay(steps);
    expect(states.map((s) => s.state)).toEqual([
      "awaiting_clarification",
      "awaiting_confirmation",
      "awaiting_confirmation",
      "finalized",
    ]);
    // The memory hit shows the identical frame rows again.
    expect(states[2].frameRows).toEqual(states[1].frameRows);
    // Spec stays hidden until the final confirmation.
    expect(states.slice(0, 3).every((s) => s.spec === null)).toBe(true);
    expect(states[3].spec).not.toBeNull();
  });

  it("mirrors every reply frame field-for-field", () => {
    const states = replay(steps);
    steps.forEach((step, i) => expectRowsMirrorFrame(states[i], step.reply.frame));
  });

  it("panel snapshots stay stable", () => {
    expect(
      replay(steps).map((s) => ({ state: s.state, frameRows: s.frameRows, spec: s.spec })),
    ).toMatchSnapshot();
  });
});

describe("view-state plumbing", () => {
  it("starting a new requirement clears everything", () => {
    const steps = fixture("case1.json");
    const dirty = replay(steps).at(-1)!;
    const fresh = startNewRequirement(dirty, "s2");
    expect(fresh.sessionId).toBe("s2");
    expect(fresh.messages).toEqual([]);
    expect(fresh.frameRows).toEqual([]);
    expect(fresh.spec).toBeNull();
  });

  it("user messages set the busy flag until a reply lands", () => {
    const steps = fixture("case1.json");
    let state = { ...initialViewState(), sessionId: "s1" };
    state = applyUserMessage(state, steps[0].sent);
    expect(state.busy).toBe(true);
    state = applyReply(state, steps[0].reply);
    expect(state.busy).toBe(false);
  });

  it("errors append a bubble and clear the busy flag", () => {
    let state = applyUserMessage(initialViewState(), "hello");
    state = applyError(state, "boom");
    expect(state.busy).toBe(false);
    expect(state.messages.at(-1)).toEqual({ speaker: "error", text: "boom" });
  });
});

describe("upload table", () => {
  const batch = JSON.parse(
    readFileSync(join(__dirname, "fixtures", "batch.json"), "utf-8"),
  ).results as BatchOutcome[];

  it("renders one row per line with friendly text or missing slots", () => {
    const rows = batchRows(batch);
    expect(rows).toHaveLength(7);
    expect(rows.slice(0, 4).every((r) => r.status === "ok")).toBe(true);
    const last = rows.at(-1)!;
    expect(last.status).toBe("needs clarification");
    expect(last.summary).toContain("time");
    expect(rows).toMatchSnapshot();
  });

  it("serializes results as downloadable JSONL", () => {
    const jsonl = batchJsonl(batch);
    const lines = jsonl.trim().split("\n");
    expect(lines).toHaveLength(7);
    expect(JSON.parse(lines[0]).status).toBe("ok");
  });
});

describe("frameRows", () => {
  it("marks absent slots as missing", () => {
    const rows = frameRows({
      entity: null,
      quantifier: null,
      location: null,
      time: null,
      condition: null,
    });
    expect(rows.every((r) => r.provenance === "missing")).toBe(true);
  });

  it("renders a defaulted time as always", () => {
    const rows = frameRows({
      entity: { text: "power factor", provenance: "extracted" },
      quantifier: null,
      location: { text: "everywhere", provenance: "extracted" },
      time: { text: null, provenance: "defaulted", spec: { kind: "always" } },
      condition: null,
    });
    const time = rows.find((r) => r.slot === "time")!;
    expect(time.value).toBe("always");
    expect(time.provenance).toBe("defaulted");
  });
});
