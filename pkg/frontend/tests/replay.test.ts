// @vitest-environment jsdom
import { describe, expect, it } from "vitest";

import type { TranscriptEvent } from "../src/api.js";
import { ReplayScreen } from "../src/replay.js";

const SECRET = "BLUE=2, YELLOW=5, PURPLE=5";

const WON_GAME: TranscriptEvent[] = [
  { event: "prompt", seq: 1, text: "system + proposal prompt" },
  { event: "response", seq: 2, text: "<CHOICE>: BLUE=1, YELLOW=1, PURPLE=1" },
  { event: "action", seq: 3 },
  { event: "prompt", seq: 4, text: "question prompt" },
  { event: "response", seq: 5, text: "<CHOICE>: 2" },
  { event: "action", seq: 6 },
  { event: "feedback", seq: 7, slot: 2, result: "FAIL" },
  { event: "prompt", seq: 8, text: "feedback + next choice prompt" },
  { event: "response", seq: 9, text: "<CHOICE>: SKIP" },
  { event: "action", seq: 10 },
  { event: "prompt", seq: 11, text: "deduce prompt" },
  { event: "response", seq: 12, text: `<CHOICE>: ${SECRET}` },
  { event: "action", seq: 13 },
  { event: "outcome", seq: 14, outcome: "won", reason: null, rounds: 1, queries: 1 },
  { event: "prompt", seq: 15, text: `The final guess is ${SECRET}. The answer is ${SECRET}, the guess is CORRECT.` },
];

function mount(): HTMLElement {
  document.body.textContent = "";
  const root = document.createElement("div");
  document.body.appendChild(root);
  return root;
}

describe("replay stepper", () => {
  it("walks steps forward and back", () => {
    const root = mount();
    const screen = new ReplayScreen(root, WON_GAME);
    expect(root.querySelector(".step-label")?.textContent).toBe("Step 1 of 5");
    expect(root.querySelector(".prompt-pane")?.textContent).toBe("system + proposal prompt");
    screen.goTo(1);
    expect(root.querySelector(".feedback-note")?.textContent).toBe("Verifier 2: FAIL");
    screen.goTo(0);
    expect(root.querySelector(".prompt-pane")?.textContent).toBe("system + proposal prompt");
  });

  it("view at step k matches the recorded history at step k", () => {
    const root = mount();
    const screen = new ReplayScreen(root, WON_GAME);
    const prompts = WON_GAME.filter((e) => e.event === "prompt").map((e) => e["text"]);
    prompts.forEach((text, index) => {
      screen.goTo(index);
      expect(root.querySelector(".prompt-pane")?.textContent).toBe(text);
    });
  });

  it("shows no outcome (and no answer) before the final step", () => {
    const root = mount();
    const screen = new ReplayScreen(root, WON_GAME);
    for (let step = 0; step < 4; step++) {
      screen.goTo(step);
      expect(root.querySelector(".outcome-banner")).toBeNull();
      // the answer string only ever appears via the final result prompt
      const pane = root.querySelector(".prompt-pane")?.textContent ?? "";
      expect(pane.includes(`The answer is ${SECRET}`)).toBe(false);
    }
    screen.goTo(4);
    expect(root.querySelector(".outcome-banner")?.textContent).toContain("cracked");
  });

  it("forfeited games show the reason banner on the last step", () => {
    const events: TranscriptEvent[] = [
      { event: "prompt", seq: 1, text: "prompt" },
      { event: "response", seq: 2, text: "garbage" },
      { event: "retry", seq: 3, kind: "format", count: 4 },
      { event: "outcome", seq: 4, outcome: "forfeit", reason: "retries", rounds: 1, queries: 0 },
      { event: "prompt", seq: 5, text: "" },
    ];
    const root = mount();
    const screen = new ReplayScreen(root, events);
    screen.goTo(1);
    expect(root.querySelector(".outcome-banner")?.textContent).toContain("forfeited (retries)");
  });

  it("empty transcripts degrade gracefully", () => {
    const root = mount();
    new ReplayScreen(root, []);
    expect(root.textContent).toContain("Empty transcript");
  });
});
