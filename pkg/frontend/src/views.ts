/**
 * Pure view-model layer: what the screens show and which controls are live.
 * The prompt pane is the service payload verbatim; presentation never
 * rewrites it, which is what makes byte parity testable.
 */

import type { Outcome, SessionState, TranscriptEvent } from "./api.js";

export interface Affordances {
  digitSelectors: boolean; // propose (Proposal) or final code (Deduce)
  proposeButton: boolean;
  verifierButtons: boolean;
  questionSkip: boolean;
  submitButton: boolean;
  deduceSkip: boolean;
}

const NONE: Affordances = {
  digitSelectors: false,
  proposeButton: false,
  verifierButtons: false,
  questionSkip: false,
  submitButton: false,
  deduceSkip: false,
};

/** Phase gating: exactly the controls the current step admits. */
export function affordances(state: SessionState): Affordances {
  if (state.finished) return NONE;
  switch (state.phase) {
    case "proposal":
      return { ...NONE, digitSelectors: true, proposeButton: true };
    case "question":
      return { ...NONE, verifierButtons: true, questionSkip: true };
    case "deduce":
      return { ...NONE, digitSelectors: true, submitButton: true, deduceSkip: true };
    default:
      return NONE;
  }
}

/** Byte-identical prompt pane content; no paraphrase, no reformatting. */
export function promptPane(state: SessionState): string {
  return state.prompt;
}

export function feedbackLines(state: SessionState): string[] {
  return state.feedback.map(
    (entry) => `Round ${entry.round} - Verifier ${entry.slot}: ${entry.result}`,
  );
}

export function statusLine(state: SessionState): string {
  if (state.finished) return "Game finished";
  const phase = state.phase[0].toUpperCase() + state.phase.slice(1);
  return (
    `Round ${state.round_number} - ${phase} - ` +
    `${state.queries_remaining} of 3 verifier tests left this round`
  );
}

export function resultBanner(outcome: Outcome | null): string | null {
  if (!outcome) return null;
  if (outcome.outcome === "won") return "You cracked the code!";
  if (outcome.outcome === "lost") {
    return outcome.reason === "cap"
      ? "Out of rounds - the code was never submitted."
      : "Wrong code - the game is lost.";
  }
  return `Game forfeited (${outcome.reason ?? "unknown reason"}).`;
}

// --- replay stepping -------------------------------------------------------------

export interface ReplayStep {
  prompt: string | null;
  response: string | null;
  feedback: string | null;
  retry: string | null;
}

/** Group transcript events into prompt-anchored steps for the stepper. */
export function replaySteps(events: TranscriptEvent[]): ReplayStep[] {
  const steps: ReplayStep[] = [];
  let current: ReplayStep | null = null;
  for (const event of events) {
    if (event.event === "prompt") {
      current = { prompt: String(event["text"] ?? ""), response: null, feedback: null, retry: null };
      steps.push(current);
    } else if (current) {
      if (event.event === "response") {
        current.response = String(event["text"] ?? "");
      } else if (event.event === "feedback") {
        current.feedback = `Verifier ${event["slot"]}: ${event["result"]}`;
      } else if (event.event === "retry") {
        current.retry = `${event["kind"]} error #${event["count"]}`;
      }
    }
  }
  return steps;
}

export function replayOutcome(events: TranscriptEvent[]): Outcome | null {
  for (let i = events.length - 1; i >= 0; i--) {
    if (events[i].event === "outcome") {
      const e = events[i] as Record<string, unknown>;
      return {
        outcome: e["outcome"] as Outcome["outcome"],
        reason: (e["reason"] as string | null) ?? null,
        submitted: (e["submitted"] as number[] | null) ?? null,
        rounds: Number(e["rounds"] ?? 0),
        queries: Number(e["queries"] ?? 0),
      };
    }
  }
  return null;
}
