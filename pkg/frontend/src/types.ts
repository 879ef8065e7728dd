/**
 * Wire types for the bilingual chat relay HTTP+JSON API.
 *
 * These mirror the server's payloads exactly; the client never invents
 * fields of its own on these objects.
 */

/** One side of a conversation. `token` is only present in the payload
 * returned to the session creator; invite links carry it onward. */
export interface Participant {
  participant_id: string;
  display_name: string;
  lang: string;
  token?: string;
}

export type MessageStatus = "unchecked" | "checked" | "revised";

/** A delivered chat message as the server records it. */
export interface Message {
  message_id: string;
  sender: string;
  seq: number;
  src_text: string;
  translated_text: string | null;
  prob_erroneous: number | null;
  warning: boolean;
  status: MessageStatus;
  supersedes: string | null;
  translation_error: boolean;
}

export interface SessionInfo {
  session_id: string;
  created_at: string;
  participants: Participant[];
}

export interface TranscriptResponse {
  session_id: string;
  messages: Message[];
}

export type ChatEventType = "message" | "revision" | "degraded";

/** One event-channel frame: an envelope around a Message. */
export interface ChatEvent {
  type: ChatEventType;
  message: Message;
}

/**
 * Whether a message gets the mistranslation badge.
 *
 * Badge state is a pure function of the Message: the server's `warning`
 * flag decides, never a client-side reading of the probability.
 */
export function isWarned(message: Message): boolean {
  return message.warning === true;
}
