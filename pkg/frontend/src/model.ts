// UI state as a pure function of the message stream.
//
// Every mutation goes through reduce(); replaying a recorded wire log
// therefore reproduces the exact same rendered model, which is how the
// headless tests work.

import type { Message, Command } from "./protocol.js";

export type Phase = "NotStarted" | "Running" | "Paused" | "Terminated";

export interface StackFrame {
  index: number;
  function: string;
  unit: string;
  line: number;
}

export interface Variable {
  name: string;
  value: string;
}

export interface StopInfo {
  reason: string;
  function?: string;
  line?: number;
  siteId?: number;
  value?: string;
  kind?: string;
  matchCount?: number;
  message?: string;
}

export interface SourceView {
  unit: string;
  content: string;
}

export interface UiSessionModel {
  connection: "connecting" | "open" | "closed";
  phase: Phase;
  stop: StopInfo | null;
  source: SourceView | null;
  highlightedLine: number | null;
  frames: StackFrame[];
  selectedFrame: number;
  variables: Variable[];
  output: string;
  notice: string | null;
  terminatedReason: string | null;
  eventLog: string[];
  // a find has been accepted, so findNext is meaningful
  hasQuery: boolean;
  // request ids in flight, so responses can be routed to the right field
  pending: Record<number, Command>;
}

export function initialModel(): UiSessionModel {
  return {
    connection: "connecting",
    phase: "NotStarted",
    stop: null,
    source: null,
    highlightedLine: null,
    frames: [],
    selectedFrame: 0,
    variables: [],
    output: "",
    notice: null,
    terminatedReason: null,
    eventLog: [],
    hasQuery: false,
    pending: {},
  };
}

// Local actions that are not wire messages.
export type UiAction =
  | { type: "connected" }
  | { type: "disconnected" }
  | { type: "sent"; id: number; command: Command }
  | { type: "selectFrame"; index: number };

export function applyAction(model: UiSessionModel, action: UiAction): UiSessionModel {
  switch (action.type) {
    case "connected":
      return { ...model, connection: "open" };
    case "disconnected":
      return { ...model, connection: "closed" };
    case "sent":
      return { ...model, pending: { ...model.pending, [action.id]: action.command } };
    case "selectFrame":
      return { ...model, selectedFrame: action.index };
  }
}

const RESUMING: Command[] = [
  "find", "findNext", "continue", "stepIn", "stepOver", "stepOut",
];

function reduceResponse(model: UiSessionModel, message: Message & { type: "response" }): UiSessionModel {
  const command = model.pending[message.id];
  const pending = { ...model.pending };
  delete pending[message.id];
  const next = { ...model, pending };
  if (!message.ok) {
    next.notice = `${message.error}: ${message.message}`;
    return next;
  }
  const body = message.body ?? {};
  switch (command) {
    case "stackTrace":
      next.frames = (body.frames as StackFrame[]) ?? [];
      return next;
    case "variables":
      next.variables = (body.variables as Variable[]) ?? [];
      return next;
    case "source":
      next.source = {
        unit: (body.unit as string) ?? "",
        content: (body.content as string) ?? "",
      };
      return next;
    case "launch":
      return next;
    default:
      if (command !== undefined && RESUMING.includes(command)) {
        if (command === "find") next.hasQuery = true;
        next.phase = "Running";
        next.highlightedLine = null;
        next.stop = null;
        next.frames = [];
        next.variables = [];
        next.notice = null;
      }
      return next;
  }
}

function describeStop(stop: StopInfo): string {
  if (stop.reason === "match") {
    return `match at line ${stop.line}: ${JSON.stringify(stop.value)} ` +
      `(${stop.kind}, site ${stop.siteId}, match #${stop.matchCount})`;
  }
  if (stop.reason === "fault") {
    return `fault at line ${stop.line}: ${stop.message}`;
  }
  return `${stop.reason} at line ${stop.line} in ${stop.function}`;
}

export function reduce(model: UiSessionModel, message: Message): UiSessionModel {
  if (message.type === "response") {
    return reduceResponse(model, message);
  }
  switch (message.event) {
    case "stopped": {
      const stop = message.body as unknown as StopInfo;
      return {
        ...model,
        phase: "Paused",
        stop,
        highlightedLine: typeof stop.line === "number" ? stop.line : null,
        selectedFrame: 0,
        notice: null,
        eventLog: [...model.eventLog, describeStop(stop)],
      };
    }
    case "output":
      return { ...model, output: model.output + (message.body.text as string ?? "") };
    case "terminated": {
      const reason = (message.body.reason as string) ?? "completed";
      return {
        ...model,
        phase: "Terminated",
        highlightedLine: null,
        stop: null,
        frames: [],
        variables: [],
        terminatedReason: reason,
        eventLog: [...model.eventLog, `terminated (${reason})`],
      };
    }
  }
}

// Which controls make sense right now; mirrors the states in which the
// protocol would answer bad_state.
export function allowedCommands(model: UiSessionModel): Set<Command> {
  if (model.connection !== "open" || model.phase === "Terminated") {
    return new Set();
  }
  switch (model.phase) {
    case "NotStarted":
      return new Set<Command>(["launch", "find", "source", "stop"]);
    case "Running":
      return new Set<Command>(["find", "pause", "source", "stop"]);
    case "Paused": {
      const commands = new Set<Command>([
        "find", "continue", "stepIn", "stepOver", "stepOut",
        "stackTrace", "variables", "source", "stop",
      ]);
      if (model.hasQuery) commands.add("findNext");
      return commands;
    }
  }
}
