/**
 * Page bootstrap.
 *
 * A participant joins through an invite link that carries the session id,
 * their participant id, and their bearer token as query parameters — the
 * transcript API itself never reveals identities or tokens. Opening the
 * page without those parameters shows a create-session form that produces
 * one invite link per participant.
 */

import { ChatApi } from "./api.js";
import { SessionClient } from "./client.js";
import type { Identity } from "./state.js";
import type { Participant } from "./types.js";

export interface JoinParams {
  sessionId: string;
  participantId: string;
  token: string;
  displayName: string;
  lang: string;
  apiBase: string;
}

/** Read invite credentials from a query string; null when absent. */
export function parseJoinParams(search: string): JoinParams | null {
  const params = new URLSearchParams(search);
  const sessionId = params.get("session");
  const participantId = params.get("pid");
  const token = params.get("token");
  if (!sessionId || !participantId || !token) return null;
  return {
    sessionId,
    participantId,
    token,
    displayName: params.get("name") ?? participantId,
    lang: params.get("lang") ?? "",
    apiBase: params.get("api") ?? "",
  };
}

/** The invite link a participant opens to join the session. */
export function inviteLink(
  pageUrl: string,
  apiBase: string,
  sessionId: string,
  participant: Participant,
): string {
  const params = new URLSearchParams({
    session: sessionId,
    pid: participant.participant_id,
    token: participant.token ?? "",
    name: participant.display_name,
    lang: participant.lang,
  });
  if (apiBase) params.set("api", apiBase);
  return `${pageUrl}?${params}`;
}

interface LocationLike {
  search: string;
  origin: string;
  pathname: string;
}

function renderCreateForm(root: HTMLElement, api: ChatApi, location: LocationLike): void {
  const doc = root.ownerDocument;
  root.textContent = "";
  const form = doc.createElement("form");
  form.className = "create-session";

  const heading = doc.createElement("h1");
  heading.textContent = "Start a translated chat";
  form.append(heading);

  const fields: { name: HTMLInputElement; lang: HTMLSelectElement }[] = [];
  for (const [index, defaults] of [
    { name: "", lang: "en" },
    { name: "", lang: "ja" },
  ].entries()) {
    const row = doc.createElement("div");
    row.className = "participant-row";
    const name = doc.createElement("input");
    name.type = "text";
    name.placeholder = `Participant ${index + 1} name`;
    name.className = "participant-name";
    const lang = doc.createElement("select");
    lang.className = "participant-lang";
    for (const code of ["en", "ja"]) {
      const option = doc.createElement("option");
      option.value = code;
      option.textContent = code;
      if (code === defaults.lang) option.selected = true;
      lang.append(option);
    }
    row.append(name, lang);
    form.append(row);
    fields.push({ name, lang });
  }

  const submit = doc.createElement("button");
  submit.type = "submit";
  submit.textContent = "Create session";
  const status = doc.createElement("div");
  status.className = "create-status";
  form.append(submit, status);

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const participants = fields.map((field, index) => ({
      name: field.name.value.trim() || `Participant ${index + 1}`,
      lang: field.lang.value,
    }));
    status.textContent = "creating…";
    void api
      .createSession(participants)
      .then((session) => {
        const links = doc.createElement("ol");
        links.className = "invite-links";
        const pageUrl = location.origin + location.pathname;
        for (const participant of session.participants) {
          const item = doc.createElement("li");
          const anchor = doc.createElement("a");
          anchor.href = inviteLink(pageUrl, api.baseUrl, session.session_id, participant);
          anchor.textContent = `Invite link for ${participant.display_name} (${participant.lang})`;
          item.append(anchor);
          links.append(item);
        }
        status.textContent = "Share one link with each participant:";
        status.append(links);
      })
      .catch((error: unknown) => {
        status.textContent = `could not create the session: ${String(
          error instanceof Error ? error.message : error,
        )}`;
      });
  });

  root.append(form);
}

/**
 * Mount the app into `root`. With invite credentials in the query string
 * this joins the session; otherwise it shows the create-session form.
 */
export function bootstrap(root: HTMLElement, location: LocationLike): SessionClient | null {
  const params = parseJoinParams(location.search);
  const apiBase = params?.apiBase || location.origin;
  const api = new ChatApi(apiBase);
  if (!params) {
    renderCreateForm(root, api, location);
    return null;
  }
  const me: Identity = {
    participantId: params.participantId,
    displayName: params.displayName,
    lang: params.lang,
    token: params.token,
  };
  const client = new SessionClient(root, api, params.sessionId, me);
  void client.join();
  return client;
}

if (typeof window !== "undefined" && typeof document !== "undefined") {
  const root = document.getElementById("app");
  if (root) bootstrap(root, window.location);
}
