/**
 * Client-side session state and its pure transition functions.
 *
 * The message list mirrors the server transcript: every function that
 * touches it re-sorts by seq, so the rendered order always equals the
 * server's order no matter how event delivery was interleaved. Nothing
 * here performs I/O; the wiring layer owns timers and the network.
 */

import type { Message } from "./types.js";

export type ConnectionState =
  | "connecting"
  | "live"
  | "reconnecting"
  | "polling"
  | "offline";

/** Who this client is within the session (from the invite credentials). */
export interface Identity {
  participantId: string;
  displayName: string;
  lang: string;
  token: string;
}

/** A revision being composed; kept so a rejected submit loses nothing. */
export interface RevisionDraft {
  messageId: string;
  text: string;
}

/** An optimistic bubble: shown immediately, replaced by the confirmed Message. */
export interface PendingSend {
  localId: number;
  text: string;
  supersedes: string | null;
}

/** A send attempted while disconnected, waiting for the connection to return. */
export interface OutboxEntry {
  localId: number;
  text: string;
  supersedes: string | null;
}

export interface ClientSessionState {
  readonly sessionId: string;
  readonly me: Identity;
  readonly messages: readonly Message[];
  readonly connection: ConnectionState;
  readonly draft: RevisionDraft | null;
  readonly pending: readonly PendingSend[];
  readonly outbox: readonly OutboxEntry[];
  readonly lastError: string | null;
  readonly fatal: string | null;
  readonly nextLocalId: number;
}

export function initialState(sessionId: string, me: Identity): ClientSessionState {
  return {
    sessionId,
    me,
    messages: [],
    connection: "connecting",
    draft: null,
    pending: [],
    outbox: [],
    lastError: null,
    fatal: null,
    nextLocalId: 1,
  };
}

/** Insert or replace by message_id, keeping the list sorted by seq. */
export function upsertMessage(
  messages: readonly Message[],
  incoming: Message,
): Message[] {
  const next = messages.filter((m) => m.message_id !== incoming.message_id);
  next.push(incoming);
  next.sort((a, b) => a.seq - b.seq);
  return next;
}

export function applyServerMessage(
  state: ClientSessionState,
  incoming: Message,
): ClientSessionState {
  return { ...state, messages: upsertMessage(state.messages, incoming) };
}

export function applyTranscript(
  state: ClientSessionState,
  messages: readonly Message[],
): ClientSessionState {
  let merged: readonly Message[] = state.messages;
  for (const message of messages) merged = upsertMessage(merged, message);
  return { ...state, messages: merged };
}

/** Highest seq seen so far, or -1 when the transcript is empty. */
export function lastSeq(state: ClientSessionState): number {
  let highest = -1;
  for (const message of state.messages) {
    if (message.seq > highest) highest = message.seq;
  }
  return highest;
}

export function setConnection(
  state: ClientSessionState,
  connection: ConnectionState,
): ClientSessionState {
  return state.connection === connection ? state : { ...state, connection };
}

export function setError(state: ClientSessionState, text: string): ClientSessionState {
  return { ...state, lastError: text };
}

export function clearError(state: ClientSessionState): ClientSessionState {
  return state.lastError === null ? state : { ...state, lastError: null };
}

/** A fatal error replaces the whole view with an explanation (bad invite). */
export function setFatal(state: ClientSessionState, text: string): ClientSessionState {
  return { ...state, fatal: text };
}

export function beginDraft(
  state: ClientSessionState,
  message: Message,
): ClientSessionState {
  return { ...state, draft: { messageId: message.message_id, text: message.src_text } };
}

export function updateDraftText(
  state: ClientSessionState,
  text: string,
): ClientSessionState {
  if (!state.draft) return state;
  return { ...state, draft: { ...state.draft, text } };
}

export function clearDraft(state: ClientSessionState): ClientSessionState {
  return state.draft === null ? state : { ...state, draft: null };
}

export function addPending(
  state: ClientSessionState,
  text: string,
  supersedes: string | null = null,
): [ClientSessionState, number] {
  const localId = state.nextLocalId;
  const entry: PendingSend = { localId, text, supersedes };
  return [
    { ...state, pending: [...state.pending, entry], nextLocalId: localId + 1 },
    localId,
  ];
}

export function resolvePending(
  state: ClientSessionState,
  localId: number,
): ClientSessionState {
  return { ...state, pending: state.pending.filter((p) => p.localId !== localId) };
}

export function enqueueOutbox(
  state: ClientSessionState,
  text: string,
  supersedes: string | null = null,
): ClientSessionState {
  const entry: OutboxEntry = { localId: state.nextLocalId, text, supersedes };
  return {
    ...state,
    outbox: [...state.outbox, entry],
    nextLocalId: state.nextLocalId + 1,
  };
}

/** Empty the outbox, returning its entries in the order they were queued. */
export function drainOutbox(
  state: ClientSessionState,
): [ClientSessionState, OutboxEntry[]] {
  return [{ ...state, outbox: [] }, [...state.outbox]];
}

/** One rendered transcript row: the latest message of its revision chain,
 * plus its superseded predecessors newest-first. */
export interface DisplayRow {
  message: Message;
  history: Message[];
}

/**
 * Collapse revision chains to their latest message, in seq order.
 *
 * A message is hidden as a standalone row when a later message supersedes
 * it; it then appears as history on the row that replaced it.
 */
export function displayRows(messages: readonly Message[]): DisplayRow[] {
  const byId = new Map(messages.map((m) => [m.message_id, m]));
  const superseded = new Set<string>();
  for (const message of messages) {
    if (message.supersedes !== null) superseded.add(message.supersedes);
  }
  const rows: DisplayRow[] = [];
  const ordered = [...messages].sort((a, b) => a.seq - b.seq);
  for (const message of ordered) {
    if (superseded.has(message.message_id)) continue;
    const history: Message[] = [];
    let cursor = message.supersedes;
    while (cursor !== null) {
      const previous = byId.get(cursor);
      if (!previous) break;
      history.push(previous);
      cursor = previous.supersedes;
    }
    rows.push({ message, history });
  }
  return rows;
}

/** Sends go straight out only while the channel (or polling) is up. */
export function canSendNow(state: ClientSessionState): boolean {
  return state.connection === "live" || state.connection === "polling";
}

/** The message this participant may currently revise: their own latest
 * displayed row, or null when they have not spoken yet. */
export function myLatestDisplayed(state: ClientSessionState): Message | null {
  const rows = displayRows(state.messages);
  for (let i = rows.length - 1; i >= 0; i -= 1) {
    const row = rows[i];
    if (row && row.message.sender === state.me.participantId) return row.message;
  }
  return null;
}
