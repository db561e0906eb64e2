import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";

import { allowedCommands, applyAction, initialModel, reduce,
         type UiSessionModel } from "../src/model.js";
import type { Command, Message } from "../src/protocol.js";

const here = dirname(fileURLToPath(import.meta.url));

// The recorded wire log of the two-line demo session: find "text"
// (ignore case), find next, stack trace, find next, continue.
const goldenLines = readFileSync(
  join(here, "fixtures", "two_line_wire.ndjson"), "utf-8")
  .trim().split("\n").map((line) => JSON.parse(line) as Message);

// The commands whose responses appear in the log, in request-id order.
const goldenCommands: Command[] =
  ["find", "findNext", "stackTrace", "findNext", "continue"];

function replayGolden(upTo: number): UiSessionModel {
  let model = initialModel();
  model = applyAction(model, { type: "connected" });
  goldenCommands.forEach((command, i) => {
    model = applyAction(model, { type: "sent", id: i + 1, command });
  });
  for (const message of goldenLines.slice(0, upTo)) {
    model = reduce(model, message);
  }
  return model;
}

describe("golden event replay", () => {
  it("first match pauses on line 1 with the constant", () => {
    // response to find + first stopped event
    const model = replayGolden(2);
    expect(model.phase).toBe("Paused");
    expect(model.highlightedLine).toBe(1);
    expect(model.stop?.value).toBe("text");
    expect(model.stop?.kind).toBe("Const");
    expect(model.stop?.siteId).toBe(0);
  });

  it("stack trace response fills the frames pane", () => {
    // ... + findNext round trip + stackTrace response
    const model = replayGolden(5);
    expect(model.frames).toEqual([
      { function: "main", index: 0, line: 2, unit: "main" },
    ]);
    expect(model.highlightedLine).toBe(2);
    expect(model.stop?.kind).toBe("LocalRead");
  });

  it("third match shows the uppercased value on line 2", () => {
    const model = replayGolden(7);
    expect(model.highlightedLine).toBe(2);
    expect(model.stop?.value).toBe("TEXT");
    expect(model.stop?.kind).toBe("CallResult");
    expect(model.stop?.matchCount).toBe(3);
  });

  it("termination clears the highlight and disables the controls", () => {
    const model = replayGolden(goldenLines.length);
    expect(model.phase).toBe("Terminated");
    expect(model.terminatedReason).toBe("completed");
    expect(model.highlightedLine).toBeNull();
    expect(allowedCommands(model).size).toBe(0);
  });

  it("replay is deterministic", () => {
    expect(replayGolden(goldenLines.length))
      .toEqual(replayGolden(goldenLines.length));
  });
});

describe("reducer details", () => {
  it("highlighted line is shown iff paused", () => {
    let model = replayGolden(2);
    expect(model.phase).toBe("Paused");
    expect(model.highlightedLine).not.toBeNull();
    // an accepted resuming response puts the model back to Running
    model = applyAction(model, { type: "sent", id: 99, command: "continue" });
    model = reduce(model, { type: "response", id: 99, ok: true });
    expect(model.phase).toBe("Running");
    expect(model.highlightedLine).toBeNull();
  });

  it("error responses become a notice, not a crash", () => {
    let model = initialModel();
    model = applyAction(model, { type: "connected" });
    model = applyAction(model, { type: "sent", id: 1, command: "stepIn" });
    model = reduce(model, {
      type: "response", id: 1, ok: false,
      error: "bad_state", message: "target is not paused",
    });
    expect(model.notice).toBe("bad_state: target is not paused");
    expect(model.phase).toBe("NotStarted");
  });

  it("output events accumulate", () => {
    let model = initialModel();
    model = reduce(model, { type: "event", event: "output", body: { text: "a\n" } });
    model = reduce(model, { type: "event", event: "output", body: { text: "b\n" } });
    expect(model.output).toBe("a\nb\n");
  });

  it("source response renders into the source pane", () => {
    let model = initialModel();
    model = applyAction(model, { type: "sent", id: 4, command: "source" });
    model = reduce(model, {
      type: "response", id: 4, ok: true,
      body: { unit: "main", path: "main.mls", content: "fn main() { }" },
    });
    expect(model.source).toEqual({ unit: "main", content: "fn main() { }" });
  });

  it("find-next is offered only once a query was accepted", () => {
    let model = replayGolden(2);
    expect(allowedCommands(model).has("findNext")).toBe(true);
    // a fresh paused session without a find does not offer it
    let fresh = initialModel();
    fresh = applyAction(fresh, { type: "connected" });
    fresh = applyAction(fresh, { type: "sent", id: 1, command: "launch" });
    fresh = reduce(fresh, { type: "response", id: 1, ok: true });
    fresh = reduce(fresh, {
      type: "event", event: "stopped",
      body: { reason: "entry", function: "main", line: 1 },
    });
    expect(fresh.phase).toBe("Paused");
    expect(allowedCommands(fresh).has("findNext")).toBe(false);
    expect(allowedCommands(fresh).has("stepOver")).toBe(true);
  });

  it("frame selection is a pure model action", () => {
    let model = replayGolden(5);
    model = applyAction(model, { type: "selectFrame", index: 0 });
    expect(model.selectedFrame).toBe(0);
  });
});
