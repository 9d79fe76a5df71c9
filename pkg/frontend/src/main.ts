/** Hash-routed shell: setup list -> live play -> replay. */

import { ApiClient } from "./api.js";
import { PlayScreen } from "./play.js";
import { ReplayScreen } from "./replay.js";

const client = new ApiClient("");

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

async function showSetupList(root: HTMLElement): Promise<void> {
  root.textContent = "";
  root.appendChild(el("h1", undefined, "Pick a game"));
  const list = el("ul", "setup-list");
  try {
    for (const setup of await client.listSetups()) {
      const item = el("li");
      const button = el(
        "button",
        "play-setup",
        `${setup.setup_id}  (${setup.mode}, ${setup.difficulty}, ${setup.verifiers} verifiers)`,
      );
      button.addEventListener("click", async () => {
        const session = await client.createSession(setup.setup_id, "human");
        location.hash = `#/play/${session.session_id}`;
      });
      item.appendChild(button);
      list.appendChild(item);
    }
  } catch (error) {
    root.appendChild(el("div", "banner", `Cannot reach the service: ${String(error)}`));
    return;
  }
  root.appendChild(list);
}

async function showPlay(root: HTMLElement, sessionId: string): Promise<void> {
  root.textContent = "";
  const header = el("div", "screen-header");
  const back = el("a", undefined, "All games");
  back.setAttribute("href", "#/");
  const replayLink = el("a", "replay-link", "Replay this game");
  replayLink.setAttribute("href", `#/replay/${sessionId}`);
  header.append(back, replayLink);
  root.appendChild(header);

  const mount = el("div", "play-mount");
  root.appendChild(mount);
  const state = await client.getPrompt(sessionId);
  new PlayScreen(mount, client, state);
}

async function showReplay(root: HTMLElement, sessionId: string): Promise<void> {
  root.textContent = "";
  const back = el("a", undefined, "All games");
  back.setAttribute("href", "#/");
  root.appendChild(back);
  const mount = el("div", "replay-mount");
  root.appendChild(mount);
  await ReplayScreen.load(mount, client, sessionId);
}

export async function route(): Promise<void> {
  const root = document.getElementById("app");
  if (!root) return;
  const hash = location.hash || "#/";
  const play = /^#\/play\/(.+)$/.exec(hash);
  const replay = /^#\/replay\/(.+)$/.exec(hash);
  if (play) {
    await showPlay(root, play[1]);
  } else if (replay) {
    await showReplay(root, replay[1]);
  } else {
    await showSetupList(root);
  }
}

window.addEventListener("hashchange", () => void route());
window.addEventListener("DOMContentLoaded", () => void route());
