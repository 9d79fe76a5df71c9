/**
 * Live play screen: verbatim prompt pane, phase-gated controls, reasoning
 * note box, feedback log. Moves are serialized to the wire format and posted
 * through the API client; a network failure shows a retriable banner and the
 * move is never double-submitted (state is resynced before any re-post).
 */

import { ApiClient, ApiError, SessionState } from "./api.js";
import { affordances, feedbackLines, promptPane, resultBanner, statusLine } from "./views.js";
import { Digit, HumanMove, toWire } from "./wire.js";

export interface PlayOptions {
  confirmFn?: (message: string) => boolean;
  onFinished?: (state: SessionState) => void;
}

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

export class PlayScreen {
  private busy = false;
  private bannerText: string | null = null;
  private pendingMove: { move: HumanMove; note: string; baseline: SessionState } | null = null;

  constructor(
    private readonly root: HTMLElement,
    private readonly client: ApiClient,
    private state: SessionState,
    private readonly options: PlayOptions = {},
  ) {
    this.render();
  }

  get sessionState(): SessionState {
    return this.state;
  }

  private confirm(message: string): boolean {
    const fn = this.options.confirmFn ?? ((m: string) => window.confirm(m));
    return fn(message);
  }

  private noteText(): string {
    const box = this.root.querySelector<HTMLTextAreaElement>(".note-box");
    return box ? box.value : "";
  }

  private digits(): { blue: Digit; yellow: Digit; purple: Digit } {
    const read = (name: string): Digit => {
      const select = this.root.querySelector<HTMLSelectElement>(`select[data-color="${name}"]`);
      return (select ? Number(select.value) : 1) as Digit;
    };
    return { blue: read("blue"), yellow: read("yellow"), purple: read("purple") };
  }

  async submitMove(move: HumanMove): Promise<void> {
    if (this.busy || this.state.finished) return; // double-click guard
    const note = this.noteText();
    if (!note.trim() && !this.confirm("Send this move without a reasoning note?")) {
      return;
    }
    this.busy = true;
    this.bannerText = null;
    this.pendingMove = { move, note, baseline: this.state };
    this.render();
    await this.post(toWire(move, note), note);
  }

  private async post(text: string, note: string): Promise<void> {
    try {
      const next = await this.client.postAction(this.state.session_id, text, note);
      this.adopt(next);
    } catch (error) {
      this.busy = false;
      if (error instanceof ApiError && error.retriable) {
        this.bannerText = "Network trouble - your move was not lost. Retry when ready.";
      } else {
        this.bannerText = `Request rejected: ${(error as Error).message}`;
        this.pendingMove = null;
      }
      this.render();
    }
  }

  /** Resync first; only re-post if the move demonstrably never applied. */
  async retryPending(): Promise<void> {
    if (this.busy || !this.pendingMove) return;
    this.busy = true;
    this.render();
    const { move, note, baseline } = this.pendingMove;
    try {
      const current = await this.client.getPrompt(this.state.session_id);
      const applied =
        current.prompt !== baseline.prompt ||
        current.feedback.length !== baseline.feedback.length ||
        current.finished;
      if (applied) {
        this.adopt(current);
        return;
      }
      await this.post(toWire(move, note), note);
    } catch {
      this.busy = false;
      this.bannerText = "Still unreachable - try again.";
      this.render();
    }
  }

  private adopt(next: SessionState): void {
    this.busy = false;
    this.pendingMove = null;
    this.state = next;
    const box = this.root.querySelector<HTMLTextAreaElement>(".note-box");
    if (box) box.value = "";
    this.render();
    if (next.finished && this.options.onFinished) this.options.onFinished(next);
  }

  render(): void {
    const state = this.state;
    const live = affordances(state);
    this.root.textContent = "";

    this.root.appendChild(el("div", "status-line", statusLine(state)));

    const pane = el("pre", "prompt-pane");
    pane.textContent = promptPane(state); // byte-identical to the service payload
    this.root.appendChild(pane);

    if (this.bannerText || (state.finished && state.outcome)) {
      const banner = el("div", "banner");
      banner.textContent = this.bannerText ?? resultBanner(state.outcome) ?? "";
      if (this.pendingMove && !this.busy) {
        const retry = el("button", "retry-button", "Retry");
        retry.addEventListener("click", () => void this.retryPending());
        banner.appendChild(retry);
      }
      this.root.appendChild(banner);
    }

    const log = el("ul", "feedback-log");
    for (const line of feedbackLines(state)) {
      log.appendChild(el("li", undefined, line));
    }
    this.root.appendChild(log);

    const controls = el("div", "controls");

    const codeRow = el("div", "code-controls");
    for (const color of ["blue", "yellow", "purple"] as const) {
      const select = el("select");
      select.dataset["color"] = color;
      for (const digit of [1, 2, 3, 4, 5]) {
        const option = el("option", undefined, String(digit));
        option.value = String(digit);
        select.appendChild(option);
      }
      select.disabled = !live.digitSelectors || this.busy;
      codeRow.appendChild(select);
    }
    if (live.proposeButton) {
      const propose = el("button", "propose-button", "Propose code");
      propose.disabled = this.busy;
      propose.addEventListener("click", () =>
        void this.submitMove({ kind: "propose", ...this.digits() }),
      );
      codeRow.appendChild(propose);
    }
    if (live.submitButton) {
      const submit = el("button", "submit-button", "Submit final code");
      submit.disabled = this.busy;
      submit.addEventListener("click", () =>
        void this.submitMove({ kind: "submit", ...this.digits() }),
      );
      codeRow.appendChild(submit);
    }
    controls.appendChild(codeRow);

    const verifierRow = el("div", "verifier-controls");
    for (let slot = 1; slot <= state.slot_count; slot++) {
      const button = el("button", "verifier-button", `Verifier ${slot}`);
      button.dataset["slot"] = String(slot);
      button.disabled = !live.verifierButtons || this.busy;
      button.addEventListener("click", () => void this.submitMove({ kind: "query", slot }));
      verifierRow.appendChild(button);
    }
    if (live.questionSkip || live.deduceSkip) {
      const skip = el(
        "button",
        "skip-button",
        live.questionSkip ? "Skip verifier testing" : "Skip to next round",
      );
      skip.disabled = this.busy;
      skip.addEventListener("click", () => void this.submitMove({ kind: "skip" }));
      verifierRow.appendChild(skip);
    }
    controls.appendChild(verifierRow);

    const note = el("textarea", "note-box") as HTMLTextAreaElement;
    note.placeholder = "Your reasoning for this move (optional, but please record it)";
    note.disabled = state.finished || this.busy;
    controls.appendChild(note);

    this.root.appendChild(controls);
  }
}
