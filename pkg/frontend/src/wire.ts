/**
 * Wire-format serialization: every control action maps to exactly one
 * `<CHOICE>:` string (plus an optional `<REASONING>:` block), so no UI path
 * can emit text the protocol parser rejects.
 */

export type Digit = 1 | 2 | 3 | 4 | 5;

export type HumanMove =
  | { kind: "propose"; blue: Digit; yellow: Digit; purple: Digit }
  | { kind: "query"; slot: number }
  | { kind: "skip" }
  | { kind: "submit"; blue: Digit; yellow: Digit; purple: Digit };

export function codeText(blue: Digit, yellow: Digit, purple: Digit): string {
  return `BLUE=${blue}, YELLOW=${yellow}, PURPLE=${purple}`;
}

function choiceValue(move: HumanMove): string {
  switch (move.kind) {
    case "propose":
    case "submit":
      return codeText(move.blue, move.yellow, move.purple);
    case "query":
      if (!Number.isInteger(move.slot) || move.slot < 1) {
        throw new Error(`invalid verifier slot ${move.slot}`);
      }
      return String(move.slot);
    case "skip":
      return "SKIP";
  }
}

/** The exact text posted to the service for one move. */
export function toWire(move: HumanMove, reasoningNote?: string): string {
  const choice = `<CHOICE>: ${choiceValue(move)}`;
  const note = reasoningNote?.trim();
  return note ? `<REASONING>: ${note}\n${choice}` : choice;
}

// Mirrors of the service-side grammar, used by tests to prove every wire
// string this module can produce is accepted by the parser.
export const CHOICE_RE = /<\s*CHOICE\s*>\s*:(?<value>[^\n]*)/i;
export const CODE_RE = /^BLUE\s*=\s*([1-5])\s*,\s*YELLOW\s*=\s*([1-5])\s*,\s*PURPLE\s*=\s*([1-5])$/i;
export const NUMBER_RE = /^\d+$/;

export function wireIsParseable(text: string): boolean {
  const match = CHOICE_RE.exec(text);
  if (!match || match.groups === undefined) return false;
  const value = match.groups["value"].trim();
  return value.toUpperCase() === "SKIP" || CODE_RE.test(value) || NUMBER_RE.test(value);
}
