/**
 * Thin typed client for the chat relay's HTTP+JSON API.
 *
 * Auth is a per-participant bearer token. Regular requests send it as an
 * Authorization header; the event-channel URL carries it as a ?token=
 * query parameter because EventSource cannot set headers.
 */

import type { Message, SessionInfo, TranscriptResponse } from "./types.js";

export class ApiError extends Error {
  readonly status: number;

  constructor(status: number, message: string) {
    super(message);
    this.name = "ApiError";
    this.status = status;
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export interface NewParticipant {
  name: string;
  lang: string;
}

function errorDetail(parsed: unknown, fallback: string): string {
  if (parsed && typeof parsed === "object") {
    const record = parsed as Record<string, unknown>;
    if (typeof record.error === "string") return record.error;
    if (record.detail !== undefined) return JSON.stringify(record.detail);
  }
  return fallback;
}

export class ChatApi {
  readonly baseUrl: string;
  private readonly fetchImpl: FetchLike;

  constructor(baseUrl: string, fetchImpl?: FetchLike) {
    this.baseUrl = baseUrl.replace(/\/$/, "");
    this.fetchImpl = fetchImpl ?? ((url, init) => fetch(url, init));
  }

  private async request<T>(
    method: string,
    path: string,
    token?: string,
    body?: unknown,
  ): Promise<T> {
    const headers: Record<string, string> = {};
    if (body !== undefined) headers["content-type"] = "application/json";
    if (token) headers["authorization"] = `Bearer ${token}`;
    const response = await this.fetchImpl(this.baseUrl + path, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const text = await response.text();
    let parsed: unknown = null;
    if (text) {
      try {
        parsed = JSON.parse(text);
      } catch {
        parsed = null;
      }
    }
    if (!response.ok) {
      throw new ApiError(response.status, errorDetail(parsed, `HTTP ${response.status}`));
    }
    return parsed as T;
  }

  /** Create a two-person session; the response includes both tokens. */
  createSession(participants: NewParticipant[]): Promise<SessionInfo> {
    return this.request("POST", "/sessions", undefined, { participants });
  }

  fetchTranscript(sessionId: string, token: string): Promise<TranscriptResponse> {
    return this.request("GET", `/sessions/${encodeURIComponent(sessionId)}/transcript`, token);
  }

  postMessage(sessionId: string, token: string, text: string): Promise<Message> {
    return this.request(
      "POST",
      `/sessions/${encodeURIComponent(sessionId)}/messages`,
      token,
      { text },
    );
  }

  postRevision(
    sessionId: string,
    token: string,
    messageId: string,
    text: string,
  ): Promise<Message> {
    const path =
      `/sessions/${encodeURIComponent(sessionId)}` +
      `/messages/${encodeURIComponent(messageId)}/revision`;
    return this.request("POST", path, token, { text });
  }

  /** Event-channel URL replaying everything with seq >= fromSeq. */
  eventsUrl(sessionId: string, token: string, fromSeq = 0): string {
    const params = new URLSearchParams({ from: String(fromSeq), token });
    return `${this.baseUrl}/sessions/${encodeURIComponent(sessionId)}/events?${params}`;
  }
}
