/**
 * SessionClient wires the API client, the event channel, the state
 * reducer, and the view together for one participant in one session.
 *
 * Connection policy: subscribe to the server-sent event channel with
 * replay from the last seen seq; on a drop, close and resubscribe from
 * the new last seq after a short delay. When no EventSource is available
 * or the stream keeps failing, fall back to polling the transcript.
 * Sends attempted while disconnected are queued and flushed once the
 * channel (or polling) is back.
 */

import { ApiError, type ChatApi } from "./api.js";
import {
  addPending,
  applyServerMessage,
  applyTranscript,
  beginDraft,
  canSendNow,
  clearDraft,
  clearError,
  drainOutbox,
  enqueueOutbox,
  initialState,
  lastSeq,
  resolvePending,
  setConnection,
  setError,
  setFatal,
  updateDraftText,
  type ClientSessionState,
  type Identity,
  type OutboxEntry,
} from "./state.js";
import { mountShell, update, type ViewRefs } from "./view.js";
import type { ChatEvent } from "./types.js";

/** The slice of the EventSource contract the client relies on. */
export interface EventSourceLike {
  onopen: (() => void) | null;
  onmessage: ((event: { data: string }) => void) | null;
  onerror: ((error?: unknown) => void) | null;
  close(): void;
}

export type EventSourceFactory = (url: string) => EventSourceLike;

export interface ClientOptions {
  /** undefined → use the browser EventSource; null → polling from the start. */
  eventSourceFactory?: EventSourceFactory | null;
  reconnectDelayMs?: number;
  pollIntervalMs?: number;
  /** Consecutive stream failures tolerated before falling back to polling. */
  maxStreamFailures?: number;
}

function defaultEventSourceFactory(): EventSourceFactory | null {
  const ctor = (globalThis as { EventSource?: new (url: string) => EventSource }).EventSource;
  if (!ctor) return null;
  return (url) => new ctor(url) as unknown as EventSourceLike;
}

export class SessionClient {
  state: ClientSessionState;

  private readonly api: ChatApi;
  private readonly refs: ViewRefs;
  private readonly factory: EventSourceFactory | null;
  private readonly reconnectDelayMs: number;
  private readonly pollIntervalMs: number;
  private readonly maxStreamFailures: number;

  private source: EventSourceLike | null = null;
  private reconnectTimer: ReturnType<typeof setTimeout> | null = null;
  private pollTimer: ReturnType<typeof setInterval> | null = null;
  private streamFailures = 0;
  private flushing = false;
  private closed = false;

  constructor(
    root: HTMLElement,
    api: ChatApi,
    sessionId: string,
    me: Identity,
    options: ClientOptions = {},
  ) {
    this.api = api;
    this.state = initialState(sessionId, me);
    this.factory =
      options.eventSourceFactory === undefined
        ? defaultEventSourceFactory()
        : options.eventSourceFactory;
    this.reconnectDelayMs = options.reconnectDelayMs ?? 1000;
    this.pollIntervalMs = options.pollIntervalMs ?? 2000;
    this.maxStreamFailures = options.maxStreamFailures ?? 3;
    this.refs = mountShell(root, {
      onSend: (text) => void this.send(text),
      onReviseOpen: (messageId) => this.openRevision(messageId),
      onReviseSubmit: (text) => void this.submitRevision(text),
      onReviseCancel: () => this.cancelRevision(),
    });
    this.render();
  }

  private setState(next: ClientSessionState): void {
    this.state = next;
    this.render();
  }

  private render(): void {
    update(this.refs, this.state);
  }

  /** Load the transcript, then attach to the event channel with replay. */
  async join(): Promise<void> {
    if (this.closed) return;
    try {
      const transcript = await this.api.fetchTranscript(
        this.state.sessionId,
        this.state.me.token,
      );
      this.setState(applyTranscript(this.state, transcript.messages));
    } catch (error) {
      if (error instanceof ApiError && error.status < 500) {
        this.setState(setFatal(this.state, `Could not join the session: ${error.message}`));
        return;
      }
      // Network trouble: stay on the page and retry the whole join.
      this.setState(setConnection(this.state, "offline"));
      this.reconnectTimer = setTimeout(() => void this.join(), this.reconnectDelayMs);
      return;
    }
    this.subscribe();
  }

  close(): void {
    this.closed = true;
    if (this.reconnectTimer !== null) clearTimeout(this.reconnectTimer);
    if (this.pollTimer !== null) clearInterval(this.pollTimer);
    if (this.source) this.source.close();
    this.source = null;
  }

  private subscribe(): void {
    if (this.closed || this.state.fatal !== null) return;
    if (!this.factory) {
      this.startPolling();
      return;
    }
    const url = this.api.eventsUrl(
      this.state.sessionId,
      this.state.me.token,
      lastSeq(this.state) + 1,
    );
    let source: EventSourceLike;
    try {
      source = this.factory(url);
    } catch {
      this.startPolling();
      return;
    }
    this.source = source;
    if (this.state.connection !== "live") {
      this.setState(setConnection(this.state, "connecting"));
    }
    source.onopen = () => {
      if (this.closed || this.source !== source) return;
      this.markLive();
    };
    source.onmessage = (event) => {
      if (this.closed || this.source !== source) return;
      let parsed: ChatEvent;
      try {
        parsed = JSON.parse(event.data) as ChatEvent;
      } catch {
        return; // not one of ours; ignore rather than tear the session down
      }
      const wasLive = this.state.connection === "live";
      let next = applyServerMessage(this.state, parsed.message);
      if (!wasLive) next = setConnection(next, "live");
      this.setState(next);
      this.streamFailures = 0;
      if (!wasLive) void this.flushOutbox();
    };
    source.onerror = () => {
      if (this.closed || this.source !== source) return;
      source.close();
      this.source = null;
      this.streamFailures += 1;
      if (this.streamFailures >= this.maxStreamFailures) {
        this.startPolling();
        return;
      }
      this.setState(setConnection(this.state, "reconnecting"));
      this.reconnectTimer = setTimeout(() => this.subscribe(), this.reconnectDelayMs);
    };
  }

  private markLive(): void {
    this.streamFailures = 0;
    this.setState(setConnection(this.state, "live"));
    void this.flushOutbox();
  }

  private startPolling(): void {
    if (this.closed || this.pollTimer !== null) return;
    this.setState(setConnection(this.state, "polling"));
    void this.flushOutbox();
    const poll = async (): Promise<void> => {
      try {
        const transcript = await this.api.fetchTranscript(
          this.state.sessionId,
          this.state.me.token,
        );
        if (this.closed) return;
        this.setState(applyTranscript(this.state, transcript.messages));
      } catch {
        // keep polling; the next cycle may succeed
      }
    };
    void poll();
    this.pollTimer = setInterval(() => void poll(), this.pollIntervalMs);
  }

  /** Post a message, showing an optimistic bubble until the server confirms. */
  async send(rawText: string): Promise<void> {
    const text = rawText.trim();
    if (!text || this.closed || this.state.fatal !== null) return;
    if (!canSendNow(this.state)) {
      this.setState(enqueueOutbox(this.state, text));
      this.refs.composerInput.value = "";
      return;
    }
    const [withPending, localId] = addPending(clearError(this.state), text);
    this.setState(withPending);
    this.refs.composerInput.value = "";
    try {
      const confirmed = await this.api.postMessage(
        this.state.sessionId,
        this.state.me.token,
        text,
      );
      this.setState(applyServerMessage(resolvePending(this.state, localId), confirmed));
    } catch (error) {
      this.handleSendFailure(error, localId, text, null);
    }
  }

  private openRevision(messageId: string): void {
    const message = this.state.messages.find((m) => m.message_id === messageId);
    if (!message) return;
    this.setState(beginDraft(clearError(this.state), message));
  }

  private cancelRevision(): void {
    this.setState(clearDraft(this.state));
  }

  /** Post a revision of the drafted message; on rejection keep the draft. */
  async submitRevision(rawText: string): Promise<void> {
    const draft = this.state.draft;
    if (!draft || this.closed) return;
    const text = rawText.trim();
    if (!text) return;
    const withText = updateDraftText(this.state, text);
    if (!canSendNow(withText)) {
      this.setState(clearDraft(enqueueOutbox(withText, text, draft.messageId)));
      return;
    }
    const [withPending, localId] = addPending(clearError(withText), text, draft.messageId);
    this.setState(withPending);
    try {
      const confirmed = await this.api.postRevision(
        this.state.sessionId,
        this.state.me.token,
        draft.messageId,
        text,
      );
      const resolved = resolvePending(this.state, localId);
      this.setState(clearDraft(applyServerMessage(resolved, confirmed)));
    } catch (error) {
      this.handleSendFailure(error, localId, text, draft.messageId);
    }
  }

  private handleSendFailure(
    error: unknown,
    localId: number,
    text: string,
    supersedes: string | null,
  ): void {
    const resolved = resolvePending(this.state, localId);
    if (error instanceof ApiError) {
      // Server said no: surface it inline and keep what was typed.
      this.setState(setError(resolved, error.message));
      if (supersedes === null) this.refs.composerInput.value = text;
      return;
    }
    // Network failure: queue the send for the next reconnect.
    let next = enqueueOutbox(resolved, text, supersedes);
    if (supersedes !== null) next = clearDraft(next);
    this.setState(next);
  }

  private async flushOutbox(): Promise<void> {
    if (this.flushing) return;
    this.flushing = true;
    try {
      while (this.state.outbox.length > 0 && canSendNow(this.state) && !this.closed) {
        const [drained, entries] = drainOutbox(this.state);
        this.setState(drained);
        for (let i = 0; i < entries.length; i += 1) {
          const delivered = await this.deliverQueued(entries[i] as OutboxEntry);
          if (!delivered) {
            // Still unreachable: restore this entry and the rest, in order,
            // for the next reconnect instead of spinning here.
            let next = this.state;
            for (const remaining of entries.slice(i)) {
              next = enqueueOutbox(next, remaining.text, remaining.supersedes);
            }
            this.setState(next);
            return;
          }
        }
      }
    } finally {
      this.flushing = false;
    }
  }

  /** Returns false only when the server was unreachable. */
  private async deliverQueued(entry: OutboxEntry): Promise<boolean> {
    try {
      const confirmed =
        entry.supersedes === null
          ? await this.api.postMessage(this.state.sessionId, this.state.me.token, entry.text)
          : await this.api.postRevision(
              this.state.sessionId,
              this.state.me.token,
              entry.supersedes,
              entry.text,
            );
      this.setState(applyServerMessage(this.state, confirmed));
      return true;
    } catch (error) {
      if (error instanceof ApiError) {
        // The server rejected this queued send; report it and move on.
        this.setState(setError(this.state, `queued send failed: ${error.message}`));
        return true;
      }
      return false;
    }
  }
}
