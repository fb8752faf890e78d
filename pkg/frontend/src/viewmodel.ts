// Pure view-state reducers. The DOM layer in main.ts only renders what
// these produce, which keeps every panel value traceable to a service
// response field (and testable against recorded fixtures).

import type { BatchOutcome, FrameView, ReplyPayload } from "./api.js";

export interface Bubble {
  speaker: "user" | "system" | "error";
  text: string;
}

export interface FrameRow {
  slot: string;
  value: string;
  provenance: string;
}

export interface SpecPanel {
  friendly: string;
  formal: string;
}

export interface ViewState {
  sessionId: string | null;
  messages: Bubble[];
  frameRows: FrameRow[];
  spec: SpecPanel | null;
  busy: boolean;
  state: string;
}

export function initialViewState(): ViewState {
  return {
    sessionId: null,
    messages: [],
    frameRows: [],
    spec: null,
    busy: false,
    state: "awaiting_requirement",
  };
}

const SLOT_ORDER = ["entity", "quantifier", "location", "time", "condition"] as const;

export function frameRows(frame: FrameView | null): FrameRow[] {
  if (!frame) return [];
  const rows: FrameRow[] = [];
  for (const slot of SLOT_ORDER) {
    const view = frame[slot];
    if (!view) {
      rows.push({ slot, value: "", provenance: "missing" });
      continue;
    }
    let value = view.text ?? "";
    if (slot === "time" && !view.text) value = "always";
    rows.push({ slot, value, provenance: view.provenance });
  }
  return rows;
}

export function applyUserMessage(state: ViewState, text: string): ViewState {
  return {
    ...state,
    busy: true,
    messages: [...state.messages, { speaker: "user", text }],
  };
}

export function applyReply(state: ViewState, reply: ReplyPayload): ViewState {
  const finalized = reply.state === "finalized";
  return {
    ...state,
    busy: false,
    state: reply.state,
    messages: [...state.messages, { speaker: "system", text: reply.reply_text }],
    frameRows: frameRows(reply.frame),
    // The spec panel fills only once the requirement is confirmed.
    spec:
      finalized && reply.formal !== null && reply.friendly !== null
        ? { formal: reply.formal, friendly: reply.friendly }
        : null,
  };
}

export function applyError(state: ViewState, message: string): ViewState {
  return {
    ...state,
    busy: false,
    messages: [...state.messages, { speaker: "error", text: message }],
  };
}

export function startNewRequirement(state: ViewState, sessionId: string): ViewState {
  return { ...initialViewState(), sessionId };
}

// ---------------------------------------------------------------------------
// Upload page

export interface BatchRow {
  line: number;
  status: string;
  summary: string;
}

export function batchRows(results: BatchOutcome[]): BatchRow[] {
  return results.map((r) => {
    if (r.status === "ok") {
      return { line: r.line, status: "ok", summary: r.friendly ?? "" };
    }
    if (r.status === "needs_clarification") {
      return {
        line: r.line,
        status: "needs clarification",
        summary: `missing: ${(r.missing ?? []).join(", ")}`,
      };
    }
    return { line: r.line, status: "error", summary: r.error ?? "" };
  });
}

export function batchJsonl(results: BatchOutcome[]): string {
  return results.map((r) => JSON.stringify(r)).join("\n") + "\n";
}
