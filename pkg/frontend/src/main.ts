// Wires the reducer, the WebSocket client and the DOM together.

import { applyAction, initialModel, reduce, type UiSessionModel } from "./model.js";
import { findRequest, simpleRequest, sourceRequest, variablesRequest,
         type Command, type QueryForm } from "./protocol.js";
import { DebugClient, defaultUrl } from "./ws.js";
import { render, type UiHandlers } from "./ui.js";

const root = document.getElementById("app") as HTMLElement;
let model: UiSessionModel = initialModel();
let client: DebugClient | null = null;

function update(next: UiSessionModel): void {
  model = next;
  render(root, model, handlers);
}

function readQueryForm(): QueryForm {
  const value = (id: string) =>
    (document.getElementById(id) as HTMLInputElement | null);
  return {
    text: value("query-text")?.value ?? "",
    matchCase: value("opt-case")?.checked ?? true,
    wholeWord: value("opt-word")?.checked ?? false,
    regex: value("opt-regex")?.checked ?? false,
    skipRepeats: value("opt-skip")?.checked ?? false,
  };
}

function send(request: ReturnType<typeof simpleRequest>): void {
  if (client === null) return;
  update(applyAction(model, { type: "sent", id: request.id, command: request.command }));
  client.send(request);
}

// After a pause, refresh the stack and the selected frame's variables.
function refreshPanes(): void {
  if (client === null || model.phase !== "Paused") return;
  send(simpleRequest(client.freshId(), "stackTrace"));
  send(variablesRequest(client.freshId(), model.selectedFrame));
}

const handlers: UiHandlers = {
  onFind: () => {
    if (client === null) return;
    const form = readQueryForm();
    if (form.text === "") {
      return;
    }
    send(findRequest(client.freshId(), form));
  },
  onCommand: (command: Command) => {
    if (client === null) return;
    send(simpleRequest(client.freshId(), command));
  },
  onSelectFrame: (index: number) => {
    if (client === null) return;
    update(applyAction(model, { type: "selectFrame", index }));
    send(variablesRequest(client.freshId(), index));
  },
};

function connect(): void {
  client = new DebugClient(defaultUrl(), {
    onOpen: () => {
      update(applyAction(model, { type: "connected" }));
      if (client !== null) {
        send(sourceRequest(client.freshId()));
      }
    },
    onMessage: (message) => {
      const wasPaused = model.phase === "Paused";
      update(reduce(model, message));
      if (!wasPaused && model.phase === "Paused") {
        refreshPanes();
      }
    },
    onClose: () => update(applyAction(model, { type: "disconnected" })),
  });
}

render(root, model, handlers);
connect();
