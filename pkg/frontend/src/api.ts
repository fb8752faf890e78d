// Typed client for the reqspec service. The UI performs no extraction
// logic of its own: everything rendered comes from these payloads.

export interface SlotView {
  text: string | null;
  provenance: string;
  start?: number | null;
  end?: number | null;
}

export interface TimeView {
  text: string | null;
  provenance: string;
  spec: { kind: string; [key: string]: unknown };
}

export interface ConditionView {
  text: string;
  provenance: string;
  comparison: {
    op: string;
    negated: boolean;
    value: { type: string; [key: string]: unknown };
  } | null;
}

export interface FrameView {
  entity: SlotView | null;
  quantifier: SlotView | null;
  location: SlotView | null;
  time: TimeView | null;
  condition: ConditionView | null;
}

export interface ReplyPayload {
  reply_text: string;
  state: string;
  frame: FrameView | null;
  formal: string | null;
  friendly: string | null;
}

export interface BatchOutcome {
  line: number;
  status: "ok" | "needs_clarification" | "error";
  frame?: FrameView;
  formal?: string;
  friendly?: string;
  missing?: string[];
  error?: string;
}

export class ApiError extends Error {
  constructor(public status: number, public detail: string) {
    super(`${status}: ${detail}`);
  }
}

async function raiseFor(resp: Response): Promise<never> {
  let detail = resp.statusText;
  try {
    const body = await resp.json();
    if (body && typeof body.detail === "string") detail = body.detail;
  } catch {
    // non-JSON error body; keep the status text
  }
  throw new ApiError(resp.status, detail);
}

export async function createSession(): Promise<string> {
  const resp = await fetch("/api/sessions", { method: "POST" });
  if (!resp.ok) return raiseFor(resp);
  const body = await resp.json();
  return body.session_id as string;
}

export async function sendMessage(sessionId: string, text: string): Promise<ReplyPayload> {
  const resp = await fetch(`/api/sessions/${sessionId}/messages`, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify({ text }),
  });
  if (!resp.ok) return raiseFor(resp);
  return (await resp.json()) as ReplyPayload;
}

export async function closeSession(sessionId: string): Promise<void> {
  await fetch(`/api/sessions/${sessionId}`, { method: "DELETE" });
}

export async function uploadBatch(text: string): Promise<BatchOutcome[]> {
  const resp = await fetch("/api/batch", {
    method: "POST",
    headers: { "Content-Type": "text/plain" },
    body: text,
  });
  if (!resp.ok) return raiseFor(resp);
  const body = await resp.json();
  return body.results as BatchOutcome[];
}
