/**
 * DOM rendering for the chat view.
 *
 * `mountShell` builds the static skeleton once — the composer and the
 * revision panel keep their input elements across updates, so in-progress
 * text survives re-renders and rejected submits. `update` re-renders the
 * dynamic regions (transcript, banners, connection indicator) from state
 * alone; it reads nothing back from the DOM.
 */

import {
  displayRows,
  myLatestDisplayed,
  type ClientSessionState,
  type DisplayRow,
} from "./state.js";
import { isWarned, type Message } from "./types.js";

export interface ViewHandlers {
  onSend(text: string): void;
  onReviseOpen(messageId: string): void;
  onReviseSubmit(text: string): void;
  onReviseCancel(): void;
}

export interface ViewRefs {
  root: HTMLElement;
  errorScreen: HTMLElement;
  main: HTMLElement;
  sessionLabel: HTMLElement;
  connection: HTMLElement;
  banner: HTMLElement;
  queuedNotice: HTMLElement;
  transcript: HTMLOListElement;
  revisePanel: HTMLFormElement;
  reviseInput: HTMLInputElement;
  composer: HTMLFormElement;
  composerInput: HTMLInputElement;
  handlers: ViewHandlers;
}

const CONNECTION_LABELS: Record<string, string> = {
  connecting: "connecting…",
  live: "live",
  reconnecting: "reconnecting…",
  polling: "updating by polling",
  offline: "offline",
};

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function mountShell(root: HTMLElement, handlers: ViewHandlers): ViewRefs {
  const doc = root.ownerDocument;
  root.textContent = "";
  root.classList.add("chat-app");

  const errorScreen = el(doc, "div", "error-screen hidden");
  errorScreen.setAttribute("role", "alert");

  const main = el(doc, "div", "chat-main");

  const header = el(doc, "header", "chat-header");
  const sessionLabel = el(doc, "span", "session-label");
  const connection = el(doc, "span", "connection");
  header.append(sessionLabel, connection);

  const banner = el(doc, "div", "banner hidden");
  banner.setAttribute("role", "alert");
  const queuedNotice = el(doc, "div", "queued-notice hidden");

  const transcript = el(doc, "ol", "transcript");

  const revisePanel = el(doc, "form", "revise-panel hidden");
  const reviseLabel = el(doc, "span", "revise-label", "Revise and resend:");
  const reviseInput = el(doc, "input", "revise-input");
  reviseInput.type = "text";
  const reviseSend = el(doc, "button", "revise-send", "Resend");
  reviseSend.type = "submit";
  const reviseCancel = el(doc, "button", "revise-cancel", "Cancel");
  reviseCancel.type = "button";
  revisePanel.append(reviseLabel, reviseInput, reviseSend, reviseCancel);
  revisePanel.addEventListener("submit", (event) => {
    event.preventDefault();
    handlers.onReviseSubmit(reviseInput.value);
  });
  reviseCancel.addEventListener("click", () => handlers.onReviseCancel());

  const composer = el(doc, "form", "composer");
  const composerInput = el(doc, "input", "composer-input");
  composerInput.type = "text";
  composerInput.placeholder = "Type a message";
  const sendButton = el(doc, "button", "send-button", "Send");
  sendButton.type = "submit";
  composer.append(composerInput, sendButton);
  composer.addEventListener("submit", (event) => {
    event.preventDefault();
    handlers.onSend(composerInput.value);
  });

  main.append(header, banner, queuedNotice, transcript, revisePanel, composer);
  root.append(errorScreen, main);

  return {
    root,
    errorScreen,
    main,
    sessionLabel,
    connection,
    banner,
    queuedNotice,
    transcript,
    revisePanel,
    reviseInput,
    composer,
    composerInput,
    handlers,
  };
}

/** The text a viewer reads for a message: senders read what they typed,
 * receivers read the translation delivered to them. */
function primaryText(message: Message, own: boolean): string {
  if (own) return message.src_text;
  return message.translated_text ?? "(no translation delivered)";
}

function appendBubbleBody(
  doc: Document,
  bubble: HTMLElement,
  message: Message,
  own: boolean,
): void {
  if (own) {
    bubble.append(el(doc, "div", "primary", message.src_text));
    const outgoing = message.translated_text ?? "(no translation delivered)";
    bubble.append(el(doc, "div", "secondary outgoing", outgoing));
  } else {
    bubble.append(el(doc, "div", "primary", primaryText(message, own)));
    const source = el(doc, "details", "source");
    if (message.translated_text === null) source.open = true;
    source.append(el(doc, "summary", undefined, "original"));
    source.append(el(doc, "div", "source-text", message.src_text));
    bubble.append(source);
  }
}

function appendStatusLine(doc: Document, bubble: HTMLElement, message: Message): void {
  const line = el(doc, "div", "meta");
  if (isWarned(message)) {
    const badge = el(doc, "span", "badge", "⚠");
    if (message.prob_erroneous !== null) {
      badge.title = `estimated error probability ${message.prob_erroneous.toFixed(2)}`;
    }
    line.append(badge);
    line.append(el(doc, "span", "warning-notice", "this translation may be wrong"));
  }
  if (message.translation_error) {
    line.append(el(doc, "span", "degraded-note", "delivered without translation"));
  }
  if (message.status === "unchecked" && !message.translation_error) {
    line.append(el(doc, "span", "status-unchecked", "not checked"));
  }
  if (line.childNodes.length > 0) bubble.append(line);
}

function appendHistory(
  doc: Document,
  bubble: HTMLElement,
  row: DisplayRow,
  own: boolean,
): void {
  if (row.history.length === 0) return;
  const details = el(doc, "details", "history");
  const label = row.history.length === 1 ? "1 earlier version" : `${row.history.length} earlier versions`;
  details.append(el(doc, "summary", undefined, label));
  const list = el(doc, "ul", "history-list");
  for (const superseded of row.history) {
    const item = el(doc, "li", "superseded");
    const struck = el(doc, "s", undefined, primaryText(superseded, own));
    item.append(struck);
    list.append(item);
  }
  details.append(list);
  bubble.append(details);
}

function renderRow(
  doc: Document,
  row: DisplayRow,
  state: ClientSessionState,
  revisableId: string | null,
  handlers: ViewHandlers,
): HTMLLIElement {
  const message = row.message;
  const own = message.sender === state.me.participantId;
  const item = el(doc, "li");
  item.className = `message ${own ? "own" : "peer"}`;
  if (isWarned(message)) item.classList.add("warned");
  if (message.translation_error) item.classList.add("degraded");
  item.dataset.messageId = message.message_id;
  item.dataset.seq = String(message.seq);
  item.dataset.sender = message.sender;

  const bubble = el(doc, "div", "bubble");
  appendHistory(doc, bubble, row, own);
  appendBubbleBody(doc, bubble, message, own);
  appendStatusLine(doc, bubble, message);

  if (own && message.message_id === revisableId) {
    const button = el(doc, "button", "revise-button", "Revise");
    button.type = "button";
    button.addEventListener("click", () => handlers.onReviseOpen(message.message_id));
    bubble.append(button);
  }

  item.append(bubble);
  return item;
}

function renderPendingRow(doc: Document, text: string, localId: number): HTMLLIElement {
  const item = el(doc, "li", "message own pending");
  item.dataset.localId = String(localId);
  const bubble = el(doc, "div", "bubble");
  bubble.append(el(doc, "div", "primary", text));
  bubble.append(el(doc, "div", "meta", "sending…"));
  item.append(bubble);
  return item;
}

export function update(refs: ViewRefs, state: ClientSessionState): void {
  const doc = refs.root.ownerDocument;

  if (state.fatal !== null) {
    refs.errorScreen.classList.remove("hidden");
    refs.errorScreen.textContent = state.fatal;
    refs.main.classList.add("hidden");
    return;
  }
  refs.errorScreen.classList.add("hidden");
  refs.main.classList.remove("hidden");

  refs.sessionLabel.textContent = `${state.me.displayName} · session ${state.sessionId}`;
  refs.connection.textContent = CONNECTION_LABELS[state.connection] ?? state.connection;
  refs.connection.dataset.connection = state.connection;

  if (state.lastError !== null) {
    refs.banner.textContent = state.lastError;
    refs.banner.classList.remove("hidden");
  } else {
    refs.banner.textContent = "";
    refs.banner.classList.add("hidden");
  }

  if (state.outbox.length > 0) {
    const noun = state.outbox.length === 1 ? "message" : "messages";
    refs.queuedNotice.textContent =
      `${state.outbox.length} ${noun} queued — will send when reconnected`;
    refs.queuedNotice.classList.remove("hidden");
  } else {
    refs.queuedNotice.textContent = "";
    refs.queuedNotice.classList.add("hidden");
  }

  const revisable = myLatestDisplayed(state);
  const revisableId = revisable ? revisable.message_id : null;
  refs.transcript.textContent = "";
  for (const row of displayRows(state.messages)) {
    refs.transcript.append(renderRow(doc, row, state, revisableId, refs.handlers));
  }
  for (const pendingSend of state.pending) {
    refs.transcript.append(renderPendingRow(doc, pendingSend.text, pendingSend.localId));
  }

  if (state.draft !== null) {
    refs.revisePanel.classList.remove("hidden");
    if (refs.revisePanel.dataset.messageId !== state.draft.messageId) {
      refs.revisePanel.dataset.messageId = state.draft.messageId;
      refs.reviseInput.value = state.draft.text;
    }
  } else {
    refs.revisePanel.classList.add("hidden");
    delete refs.revisePanel.dataset.messageId;
    refs.reviseInput.value = "";
  }
}
