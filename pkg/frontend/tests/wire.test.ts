import { describe, expect, it } from "vitest";

import { Digit, HumanMove, codeText, toWire, wireIsParseable } from "../src/wire.js";

const DIGITS: Digit[] = [1, 2, 3, 4, 5];

describe("wire serialization", () => {
  it("proposals carry the exact code syntax", () => {
    expect(toWire({ kind: "propose", blue: 1, yellow: 1, purple: 1 })).toBe(
      "<CHOICE>: BLUE=1, YELLOW=1, PURPLE=1",
    );
  });

  it("queries carry the verifier number", () => {
    expect(toWire({ kind: "query", slot: 2 })).toBe("<CHOICE>: 2");
  });

  it("skip is the SKIP literal", () => {
    expect(toWire({ kind: "skip" })).toBe("<CHOICE>: SKIP");
  });

  it("submit reuses the proposal code syntax", () => {
    expect(toWire({ kind: "submit", blue: 5, yellow: 1, purple: 3 })).toBe(
      "<CHOICE>: BLUE=5, YELLOW=1, PURPLE=3",
    );
  });

  it("a reasoning note becomes a REASONING block above the choice", () => {
    expect(toWire({ kind: "query", slot: 1 }, "testing parity")).toBe(
      "<REASONING>: testing parity\n<CHOICE>: 1",
    );
  });

  it("blank notes are dropped, not serialized", () => {
    expect(toWire({ kind: "skip" }, "   ")).toBe("<CHOICE>: SKIP");
  });

  it("every producible wire string is accepted by the protocol grammar", () => {
    const moves: HumanMove[] = [{ kind: "skip" }];
    for (let slot = 1; slot <= 6; slot++) moves.push({ kind: "query", slot });
    for (const blue of DIGITS)
      for (const yellow of DIGITS)
        for (const purple of DIGITS) {
          moves.push({ kind: "propose", blue, yellow, purple });
          moves.push({ kind: "submit", blue, yellow, purple });
        }
    for (const move of moves) {
      expect(wireIsParseable(toWire(move)), JSON.stringify(move)).toBe(true);
      expect(wireIsParseable(toWire(move, "because I said so"))).toBe(true);
    }
  });

  it("each move maps to exactly one wire string", () => {
    const a = toWire({ kind: "propose", blue: 2, yellow: 4, purple: 3 });
    const b = toWire({ kind: "propose", blue: 2, yellow: 4, purple: 3 });
    expect(a).toBe(b);
    expect(codeText(2, 4, 3)).toBe("BLUE=2, YELLOW=4, PURPLE=3");
  });

  it("rejects impossible verifier slots", () => {
    expect(() => toWire({ kind: "query", slot: 0 })).toThrow();
    expect(() => toWire({ kind: "query", slot: 1.5 })).toThrow();
  });
});
