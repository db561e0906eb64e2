import { readFileSync, existsSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import Ajv2020 from "ajv/dist/2020.js";
import { describe, expect, it } from "vitest";

import { emptyQueryForm, findRequest, parseMessage, simpleRequest,
         sourceRequest, variablesRequest } from "../src/protocol.js";

const here = dirname(fileURLToPath(import.meta.url));
const schemaPath = join(here, "..", "schema.json");
const schema = JSON.parse(readFileSync(schemaPath, "utf-8"));

const ajv = new Ajv2020();
const validate = ajv.compile(schema);

describe("request builders emit schema-valid messages", () => {
  it("find request carries the full query form", () => {
    const request = findRequest(1, {
      text: "text", matchCase: false, wholeWord: false,
      regex: false, skipRepeats: true,
    });
    expect(validate(request)).toBe(true);
    expect(request.body).toEqual({
      text: "text", matchCase: false, wholeWord: false,
      regex: false, skipRepeats: true,
    });
  });

  it("every simple command validates", () => {
    const commands = ["launch", "findNext", "continue", "stepIn", "stepOver",
                      "stepOut", "pause", "stackTrace", "stop"] as const;
    for (const [i, command] of commands.entries()) {
      expect(validate(simpleRequest(i + 1, command))).toBe(true);
    }
  });

  it("variables and source requests validate", () => {
    expect(validate(variablesRequest(3, 1))).toBe(true);
    expect(validate(sourceRequest(4))).toBe(true);
    expect(validate(sourceRequest(5, "main"))).toBe(true);
  });

  it("a made-up command would not validate", () => {
    expect(validate({ type: "request", id: 1, command: "selfDestruct" }))
      .toBe(false);
  });
});

describe("message parsing", () => {
  it("accepts responses and events, rejects junk", () => {
    expect(parseMessage('{"type":"response","id":1,"ok":true}'))
      .toEqual({ type: "response", id: 1, ok: true });
    expect(parseMessage('{"type":"event","event":"output","body":{"text":"x"}}'))
      .not.toBeNull();
    expect(parseMessage("not json")).toBeNull();
    expect(parseMessage("[1,2]")).toBeNull();
    expect(parseMessage('{"type":"banana"}')).toBeNull();
  });

  it("the whole golden wire log parses and validates", () => {
    const lines = readFileSync(
      join(here, "fixtures", "two_line_wire.ndjson"), "utf-8")
      .trim().split("\n");
    for (const line of lines) {
      const message = parseMessage(line);
      expect(message).not.toBeNull();
      expect(validate(JSON.parse(line))).toBe(true);
    }
  });
});

describe("vendored fixtures stay in sync with the backend", () => {
  it("schema.json is byte-identical to the served one", () => {
    const upstream = join(here, "..", "..", "src", "minilang",
                          "protocol_schema.json");
    if (!existsSync(upstream)) return;   // standalone checkout of the UI
    expect(readFileSync(schemaPath, "utf-8"))
      .toBe(readFileSync(upstream, "utf-8"));
  });

  it("the wire log fixture matches the backend golden", () => {
    const upstream = join(here, "..", "..", "tests", "golden",
                          "two_line_wire.ndjson");
    if (!existsSync(upstream)) return;
    expect(readFileSync(join(here, "fixtures", "two_line_wire.ndjson"), "utf-8"))
      .toBe(readFileSync(upstream, "utf-8"));
  });
});

describe("query form defaults", () => {
  it("mirror the backend defaults", () => {
    expect(emptyQueryForm).toEqual({
      text: "", matchCase: true, wholeWord: false,
      regex: false, skipRepeats: false,
    });
  });
});
