// Wire message types and request builders for the debug protocol.
// The envelope mirrors the vendored schema.json; messages travel as one
// JSON object per line / WebSocket text frame.

export type Command =
  | "launch" | "find" | "findNext" | "continue"
  | "stepIn" | "stepOver" | "stepOut"
  | "pause" | "stackTrace" | "variables" | "source" | "stop";

export interface Request {
  type: "request";
  id: number;
  command: Command;
  body?: Record<string, unknown>;
}

export interface Response {
  type: "response";
  id: number;
  ok: boolean;
  body?: Record<string, unknown>;
  error?: "bad_request" | "bad_state";
  message?: string;
}

export interface Event {
  type: "event";
  event: "stopped" | "output" | "terminated";
  body: Record<string, unknown>;
}

export type Message = Response | Event;

export interface QueryForm {
  text: string;
  matchCase: boolean;
  wholeWord: boolean;
  regex: boolean;
  skipRepeats: boolean;
}

export const emptyQueryForm: QueryForm = {
  text: "",
  matchCase: true,
  wholeWord: false,
  regex: false,
  skipRepeats: false,
};

export function findRequest(id: number, form: QueryForm): Request {
  return {
    type: "request",
    id,
    command: "find",
    body: {
      text: form.text,
      matchCase: form.matchCase,
      wholeWord: form.wholeWord,
      regex: form.regex,
      skipRepeats: form.skipRepeats,
    },
  };
}

export function simpleRequest(id: number, command: Command): Request {
  return { type: "request", id, command };
}

export function variablesRequest(id: number, frameIndex: number): Request {
  return { type: "request", id, command: "variables", body: { frameIndex } };
}

export function sourceRequest(id: number, unit?: string): Request {
  return unit === undefined
    ? { type: "request", id, command: "source" }
    : { type: "request", id, command: "source", body: { unit } };
}

export function parseMessage(text: string): Message | null {
  let data: unknown;
  try {
    data = JSON.parse(text);
  } catch {
    return null;
  }
  if (typeof data !== "object" || data === null) return null;
  const m = data as Message;
  if (m.type === "response" || m.type === "event") return m;
  return null;
}
