/**
 * Transcript replay: step through prompts, responses, feedback, and retries
 * exactly as they happened. The outcome (and with it anything that reveals
 * the answer) only appears on the final step.
 */

import { ApiClient, TranscriptEvent } from "./api.js";
import { ReplayStep, replayOutcome, replaySteps, resultBanner } from "./views.js";

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

export class ReplayScreen {
  private steps: ReplayStep[] = [];
  private outcome: ReturnType<typeof replayOutcome> = null;
  private index = 0;

  constructor(
    private readonly root: HTMLElement,
    events: TranscriptEvent[],
  ) {
    this.steps = replaySteps(events);
    this.outcome = replayOutcome(events);
    this.render();
  }

  static async load(root: HTMLElement, client: ApiClient, sessionId: string): Promise<ReplayScreen> {
    const transcript = await client.getTranscript(sessionId);
    return new ReplayScreen(root, transcript.events);
  }

  get stepIndex(): number {
    return this.index;
  }

  goTo(index: number): void {
    this.index = Math.min(Math.max(index, 0), this.steps.length - 1);
    this.render();
  }

  render(): void {
    this.root.textContent = "";
    if (this.steps.length === 0) {
      this.root.appendChild(el("div", "banner", "Empty transcript."));
      return;
    }
    const step = this.steps[this.index];
    const isLast = this.index === this.steps.length - 1;

    const nav = el("div", "replay-nav");
    const prev = el("button", "prev-step", "Previous");
    prev.disabled = this.index === 0;
    prev.addEventListener("click", () => this.goTo(this.index - 1));
    const label = el("span", "step-label", `Step ${this.index + 1} of ${this.steps.length}`);
    const next = el("button", "next-step", "Next");
    next.disabled = isLast;
    next.addEventListener("click", () => this.goTo(this.index + 1));
    nav.append(prev, label, next);
    this.root.appendChild(nav);

    const pane = el("pre", "prompt-pane");
    pane.textContent = step.prompt ?? "";
    this.root.appendChild(pane);

    if (step.retry) this.root.appendChild(el("div", "retry-note", `Retry: ${step.retry}`));
    if (step.response !== null) {
      const response = el("pre", "response-pane");
      response.textContent = step.response;
      this.root.appendChild(response);
    }
    if (step.feedback) this.root.appendChild(el("div", "feedback-note", step.feedback));

    if (isLast && this.outcome) {
      const banner = el("div", "banner outcome-banner", resultBanner(this.outcome) ?? "");
      this.root.appendChild(banner);
    }
  }
}
