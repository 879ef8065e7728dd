/**
 * End-to-end UI flow against the live relay service.
 *
 * A real server process runs with a scripted detector and tagging
 * translators (tests/fixtures/serve_stub.py); two browser sessions —
 * one per participant — talk to it over real HTTP and the real
 * server-sent event channel. The flow:
 *
 *   1. a message containing the detector's trigger arrives with
 *      warning=true and both participants' views render the badge;
 *   2. revise-and-resend produces a struck-through original plus a
 *      replacement bubble in both views;
 *   3. rendered message order equals the server's seq order in both
 *      views (arrival-order independence itself is pinned by the
 *      scripted-delivery tests in client.test.ts).
 */

import { spawn, type ChildProcess } from "node:child_process";
import { join } from "node:path";
import { fileURLToPath } from "node:url";

import { afterAll, beforeAll, expect, test } from "vitest";

import { ChatApi } from "../src/api.js";
import { SessionClient } from "../src/client.js";
import type { Identity } from "../src/state.js";
import { NodeEventSource } from "./helpers/sse.js";
import { until } from "./helpers/scripted.js";

// Under the browser-like test environment import.meta.url is an http URL
// whose pathname is relative to the project root (the working directory).
const FIXTURE_URL = new URL("./fixtures/serve_stub.py", import.meta.url);
const FIXTURE =
  FIXTURE_URL.protocol === "file:"
    ? fileURLToPath(FIXTURE_URL)
    : join(process.cwd(), FIXTURE_URL.pathname);

let server: ChildProcess;
let baseUrl: string;

function readPortLine(proc: ChildProcess): Promise<number> {
  return new Promise((resolve, reject) => {
    let buffer = "";
    const timer = setTimeout(() => reject(new Error("fixture never printed its port")), 30_000);
    proc.stdout?.on("data", (chunk: Buffer) => {
      buffer += chunk.toString();
      const match = buffer.match(/PORT (\d+)/);
      if (match) {
        clearTimeout(timer);
        resolve(Number(match[1]));
      }
    });
    proc.on("exit", (code) => {
      clearTimeout(timer);
      reject(new Error(`fixture exited early with code ${String(code)}: ${buffer}`));
    });
  });
}

beforeAll(async () => {
  server = spawn("python3", [FIXTURE], { stdio: ["ignore", "pipe", "pipe"] });
  let stderr = "";
  server.stderr?.on("data", (chunk: Buffer) => {
    stderr += chunk.toString();
  });
  const port = await readPortLine(server).catch((error: unknown) => {
    throw new Error(`${String(error)}\nfixture stderr:\n${stderr}`);
  });
  baseUrl = `http://127.0.0.1:${port}`;
  const deadline = Date.now() + 30_000;
  for (;;) {
    try {
      const response = await fetch(`${baseUrl}/docs`);
      if (response.ok) break;
    } catch {
      // not listening yet
    }
    if (Date.now() > deadline) throw new Error(`relay never came up\n${stderr}`);
    await new Promise((resolve) => setTimeout(resolve, 100));
  }
});

afterAll(() => {
  server?.kill("SIGTERM");
});

function mountView(): HTMLElement {
  const root = document.createElement("div");
  document.body.append(root);
  return root;
}

function sendFrom(root: HTMLElement, text: string): void {
  const input = root.querySelector<HTMLInputElement>(".composer-input");
  const form = root.querySelector<HTMLFormElement>(".composer");
  if (!input || !form) throw new Error("composer not mounted");
  input.value = text;
  form.dispatchEvent(new Event("submit", { bubbles: true, cancelable: true }));
}

function row(root: HTMLElement, messageId: string): HTMLElement | null {
  return root.querySelector<HTMLElement>(`.transcript > li[data-message-id="${messageId}"]`);
}

function renderedSeqs(root: HTMLElement): number[] {
  return [...root.querySelectorAll<HTMLElement>(".transcript > li")]
    .filter((item) => item.dataset.seq !== undefined)
    .map((item) => Number(item.dataset.seq));
}

test(
  "warned message, revise-and-resend, and seq ordering across both live views",
  async () => {
    const api = new ChatApi(baseUrl);
    const session = await api.createSession([
      { name: "Kenji", lang: "en" },
      { name: "Yuki", lang: "ja" },
    ]);
    const [kenji, yuki] = session.participants;
    if (!kenji?.token || !yuki?.token) throw new Error("session creation lost the tokens");

    const identities: [Identity, Identity] = [
      {
        participantId: kenji.participant_id,
        displayName: kenji.display_name,
        lang: kenji.lang,
        token: kenji.token,
      },
      {
        participantId: yuki.participant_id,
        displayName: yuki.display_name,
        lang: yuki.lang,
        token: yuki.token,
      },
    ];
    const kenjiRoot = mountView();
    const yukiRoot = mountView();
    const factory = (url: string): NodeEventSource => new NodeEventSource(url);
    const kenjiClient = new SessionClient(kenjiRoot, api, session.session_id, identities[0], {
      eventSourceFactory: factory,
      reconnectDelayMs: 200,
    });
    const yukiClient = new SessionClient(yukiRoot, api, session.session_id, identities[1], {
      eventSourceFactory: factory,
      reconnectDelayMs: 200,
    });
    try {
      await Promise.all([kenjiClient.join(), yukiClient.join()]);
      await until(
        () =>
          kenjiRoot.querySelector<HTMLElement>(".connection")?.dataset.connection === "live" &&
          yukiRoot.querySelector<HTMLElement>(".connection")?.dataset.connection === "live",
        "both sessions live",
      );

      // An opener so the next message has context to be checked against.
      sendFrom(kenjiRoot, "Hello Yuki! Shall we fix a time?");
      await until(
        () => row(kenjiRoot, "m0") !== null && row(yukiRoot, "m0") !== null,
        "the opener in both views",
      );
      expect(row(kenjiRoot, "m0")?.querySelector(".primary")?.textContent).toBe(
        "Hello Yuki! Shall we fix a time?",
      );
      // Receiver reads the translation, with the source a click away.
      expect(row(yukiRoot, "m0")?.querySelector(".primary")?.textContent).toContain("[ja]");
      expect(row(yukiRoot, "m0")?.querySelector(".source-text")?.textContent).toBe(
        "Hello Yuki! Shall we fix a time?",
      );

      // This text contains the scripted detector's trigger: it arrives warned.
      sendFrom(yukiRoot, "grate, lets meat at sevn");
      await until(
        () =>
          row(kenjiRoot, "m1")?.querySelector(".badge") != null &&
          row(yukiRoot, "m1")?.querySelector(".badge") != null,
        "the warning badge in both participants' views",
      );
      for (const root of [kenjiRoot, yukiRoot]) {
        const warned = row(root, "m1");
        expect(warned?.classList.contains("warned")).toBe(true);
        expect(warned?.querySelector(".badge")).not.toBeNull();
        expect(warned?.querySelector(".warning-notice")?.textContent).toBe(
          "this translation may be wrong",
        );
      }

      // Revise-and-resend from the sender's own view, through the real UI path.
      const reviseButton = row(yukiRoot, "m1")?.querySelector<HTMLButtonElement>(
        ".revise-button",
      );
      expect(reviseButton).not.toBeNull();
      reviseButton?.click();
      const reviseInput = yukiRoot.querySelector<HTMLInputElement>(".revise-input");
      const revisePanel = yukiRoot.querySelector<HTMLFormElement>(".revise-panel");
      if (!reviseInput || !revisePanel) throw new Error("revise panel not mounted");
      expect(reviseInput.value).toBe("grate, lets meat at sevn");
      reviseInput.value = "great, let's meet at seven";
      revisePanel.dispatchEvent(new Event("submit", { bubbles: true, cancelable: true }));

      await until(
        () => row(kenjiRoot, "m2") !== null && row(yukiRoot, "m2") !== null,
        "the replacement bubble in both views",
      );
      for (const [root, who] of [
        [kenjiRoot, "receiver"],
        [yukiRoot, "sender"],
      ] as const) {
        const replacement = row(root, "m2");
        expect(replacement, `replacement bubble missing in ${who} view`).not.toBeNull();
        // The superseded original is struck through inside the replacement row.
        const struck = replacement?.querySelector("s");
        expect(struck?.textContent ?? "").toContain("grate, lets meat at sevn");
        // The original no longer stands alone.
        expect(row(root, "m1")).toBeNull();
        // No badge on the clean replacement.
        expect(replacement?.querySelector(".badge")).toBeNull();
      }
      expect(row(yukiRoot, "m2")?.querySelector(".primary")?.textContent).toBe(
        "great, let's meet at seven",
      );
      expect(row(kenjiRoot, "m2")?.querySelector(".primary")?.textContent).toBe(
        "[en] great, let's meet at seven",
      );

      // Rendered order equals the server's seq order in both views.
      const transcript = await api.fetchTranscript(session.session_id, identities[0].token);
      expect(transcript.messages.map((m) => m.seq)).toEqual([0, 1, 2]);
      for (const root of [kenjiRoot, yukiRoot]) {
        const seqs = renderedSeqs(root);
        expect(seqs).toEqual([...seqs].sort((a, b) => a - b));
        expect(seqs).toEqual([0, 2]); // m1 is collapsed into m2's history
      }
    } finally {
      kenjiClient.close();
      yukiClient.close();
    }
  },
  60_000,
);
