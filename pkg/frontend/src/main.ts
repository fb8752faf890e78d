// DOM wiring for the single-page client: a conversation window on the
// left, keyword-results and specification panels on the right, plus an
// upload view for batch files. All state lives in the viewmodel.

import {
  ApiError,
  closeSession,
  createSession,
  sendMessage,
  uploadBatch,
  type BatchOutcome,
} from "./api.js";
import {
  applyError,
  applyReply,
  applyUserMessage,
  batchJsonl,
  batchRows,
  initialViewState,
  startNewRequirement,
  type ViewState,
} from "./viewmodel.js";
import { STARTERS } from "./starters.js";

let view: ViewState = initialViewState();

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

const messagesBox = el<HTMLDivElement>("messages");
const frameBody = el<HTMLTableSectionElement>("frame-body");
const specFriendly = el<HTMLParagraphElement>("spec-friendly");
const specFormal = el<HTMLPreElement>("spec-formal");
const specToggle = el<HTMLButtonElement>("spec-toggle");
const specPanel = el<HTMLDivElement>("spec-panel");
const input = el<HTMLTextAreaElement>("chat-input");
const sendBtn = el<HTMLButtonElement>("send");
const newBtn = el<HTMLButtonElement>("new-requirement");
const uploadBtn = el<HTMLButtonElement>("show-upload");
const backBtn = el<HTMLButtonElement>("back-to-chat");
const chatView = el<HTMLDivElement>("chat-view");
const uploadView = el<HTMLDivElement>("upload-view");
const fileInput = el<HTMLInputElement>("file-input");
const uploadError = el<HTMLDivElement>("upload-error");
const resultsBody = el<HTMLTableSectionElement>("results-body");
const downloadBtn = el<HTMLButtonElement>("download-jsonl");
const startersBox = el<HTMLDivElement>("starters");

let lastBatch: BatchOutcome[] = [];

function render(): void {
  messagesBox.replaceChildren(
    ...view.messages.map((m) => {
      const div = document.createElement("div");
      div.className = `bubble ${m.speaker}`;
      div.textContent = m.text;
      return div;
    }),
  );
  messagesBox.scrollTop = messagesBox.scrollHeight;

  frameBody.replaceChildren(
    ...view.frameRows.map((row) => {
      const tr = document.createElement("tr");
      for (const cell of [row.slot, row.value, row.provenance]) {
        const td = document.createElement("td");
        td.textContent = cell;
        tr.appendChild(td);
      }
      if (row.provenance === "missing") tr.className = "missing";
      return tr;
    }),
  );

  if (view.spec) {
    specPanel.classList.remove("empty");
    specFriendly.textContent = view.spec.friendly;
    specFormal.textContent = view.spec.formal;
  } else {
    specPanel.classList.add("empty");
    specFriendly.textContent = "Confirm a requirement to see its specification.";
    specFormal.textContent = "";
    specFormal.hidden = true;
    specToggle.textContent = "show formal";
  }
  specToggle.hidden = !view.spec;

  sendBtn.disabled = view.busy;
  newBtn.disabled = view.busy;
  input.disabled = view.busy || view.state === "finalized";
  input.placeholder =
    view.state === "finalized"
      ? "Requirement confirmed. Click 'start a new requirement' to continue."
      : "Type a requirement, a correction like 'location all the buildings', or 'yes'.";
}

async function ensureSession(): Promise<string> {
  if (!view.sessionId) {
    view = { ...view, sessionId: await createSession() };
  }
  return view.sessionId!;
}

async function submit(text: string): Promise<void> {
  const trimmed = text.trim();
  if (!trimmed || view.busy || view.state === "finalized") return;
  view = applyUserMessage(view, trimmed);
  render();
  try {
    const sid = await ensureSession();
    const reply = await sendMessage(sid, trimmed);
    view = applyReply(view, reply);
  } catch (err) {
    const message = err instanceof ApiError ? err.detail : String(err);
    view = applyError(view, message);
  }
  render();
}

async function newRequirement(): Promise<void> {
  if (view.busy) return; // debounce double clicks
  view = { ...view, busy: true };
  render();
  const old = view.sessionId;
  if (old) await closeSession(old).catch(() => undefined);
  try {
    const sid = await createSession();
    view = startNewRequirement(view, sid);
  } catch (err) {
    view = applyError({ ...view, sessionId: null }, String(err));
  }
  render();
}

async function handleUpload(): Promise<void> {
  const file = fileInput.files?.[0];
  if (!file) return;
  uploadError.hidden = true;
  const text = await file.text();
  try {
    lastBatch = await uploadBatch(text);
  } catch (err) {
    uploadError.hidden = false;
    uploadError.textContent =
      err instanceof ApiError ? `Upload failed (${err.status}): ${err.detail}` : String(err);
    return;
  }
  resultsBody.replaceChildren(
    ...batchRows(lastBatch).map((row) => {
      const tr = document.createElement("tr");
      for (const cell of [String(row.line), row.status, row.summary]) {
        const td = document.createElement("td");
        td.textContent = cell;
        tr.appendChild(td);
      }
      tr.className = row.status.replace(" ", "-");
      return tr;
    }),
  );
  downloadBtn.hidden = lastBatch.length === 0;
}

function downloadResults(): void {
  const blob = new Blob([batchJsonl(lastBatch)], { type: "application/jsonl" });
  const url = URL.createObjectURL(blob);
  const a = document.createElement("a");
  a.href = url;
  a.download = "batch-results.jsonl";
  a.click();
  URL.revokeObjectURL(url);
}

function init(): void {
  sendBtn.addEventListener("click", () => {
    void submit(input.value);
    input.value = "";
  });
  input.addEventListener("keydown", (ev) => {
    if (ev.key === "Enter" && !ev.shiftKey) {
      ev.preventDefault();
      void submit(input.value);
      input.value = "";
    }
  });
  newBtn.addEventListener("click", () => void newRequirement());
  specToggle.addEventListener("click", () => {
    specFormal.hidden = !specFormal.hidden;
    specToggle.textContent = specFormal.hidden ? "show formal" : "hide formal";
  });
  uploadBtn.addEventListener("click", () => {
    chatView.hidden = true;
    uploadView.hidden = false;
  });
  backBtn.addEventListener("click", () => {
    uploadView.hidden = true;
    chatView.hidden = false;
  });
  fileInput.addEventListener("change", () => void handleUpload());
  downloadBtn.addEventListener("click", downloadResults);

  startersBox.replaceChildren(
    ...STARTERS.map((text) => {
      const button = document.createElement("button");
      button.className = "starter";
      button.textContent = text;
      button.addEventListener("click", () => void submit(text));
      return button;
    }),
  );

  render();
}

init();
