// DOM rendering: the whole view is rebuilt from the model on every change.
// Cheap at this scale and keeps rendering trivially consistent with state.

import { allowedCommands, type UiSessionModel } from "./model.js";
import type { Command } from "./protocol.js";

export interface UiHandlers {
  onFind: () => void;
  onCommand: (command: Command) => void;
  onSelectFrame: (index: number) => void;
}

function el(tag: string, className: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function renderSource(model: UiSessionModel): HTMLElement {
  const pane = el("div", "pane source-pane");
  pane.appendChild(el("h2", "", model.source ? `source: ${model.source.unit}` : "source"));
  const listing = el("pre", "listing");
  const lines = (model.source?.content ?? "").split("\n");
  lines.forEach((text, i) => {
    const lineNo = i + 1;
    const row = el("div", "line");
    if (model.highlightedLine === lineNo) row.classList.add("current-line");
    row.appendChild(el("span", "lineno", String(lineNo).padStart(3)));
    row.appendChild(el("span", "linetext", " " + text));
    listing.appendChild(row);
  });
  pane.appendChild(listing);
  return pane;
}

function renderStack(model: UiSessionModel, handlers: UiHandlers): HTMLElement {
  const pane = el("div", "pane stack-pane");
  pane.appendChild(el("h2", "", "call stack"));
  const list = el("ol", "frames");
  model.frames.forEach((frame) => {
    const item = el("li", "frame",
      `${frame.unit}.${frame.function} line ${frame.line}`);
    if (frame.index === model.selectedFrame) item.classList.add("selected");
    item.addEventListener("click", () => handlers.onSelectFrame(frame.index));
    list.appendChild(item);
  });
  pane.appendChild(list);
  return pane;
}

function renderVariables(model: UiSessionModel): HTMLElement {
  const pane = el("div", "pane vars-pane");
  pane.appendChild(el("h2", "", "variables"));
  const table = el("table", "vars");
  model.variables.forEach((v) => {
    const row = el("tr", "");
    row.appendChild(el("td", "var-name", v.name));
    row.appendChild(el("td", "var-value", v.value));
    table.appendChild(row);
  });
  pane.appendChild(table);
  return pane;
}

function renderControls(model: UiSessionModel, handlers: UiHandlers): HTMLElement {
  const allowed = allowedCommands(model);
  const bar = el("div", "controls");

  const findButton = el("button", "find-button", "Find in Runtime") as HTMLButtonElement;
  findButton.disabled = !allowed.has("find");
  findButton.addEventListener("click", handlers.onFind);
  bar.appendChild(findButton);

  const buttons: Array<[string, Command]> = [
    ["Find Next", "findNext"],
    ["Continue", "continue"],
    ["Step In", "stepIn"],
    ["Step Over", "stepOver"],
    ["Step Out", "stepOut"],
    ["Pause", "pause"],
    ["Stop", "stop"],
  ];
  for (const [label, command] of buttons) {
    const button = el("button", `cmd-${command}`, label) as HTMLButtonElement;
    button.disabled = !allowed.has(command);
    button.addEventListener("click", () => handlers.onCommand(command));
    bar.appendChild(button);
  }
  return bar;
}

function renderStatus(model: UiSessionModel): HTMLElement {
  const bar = el("div", "status");
  const phase = model.phase === "Terminated" && model.terminatedReason
    ? `Terminated (${model.terminatedReason})`
    : model.phase;
  bar.appendChild(el("span", "phase", `${model.connection} | ${phase}`));
  if (model.stop?.reason === "match") {
    bar.appendChild(el("span", "match-info",
      ` match: ${JSON.stringify(model.stop.value)} [${model.stop.kind}]`));
  }
  if (model.notice) {
    bar.appendChild(el("span", "notice", ` ${model.notice}`));
  }
  return bar;
}

function renderLogs(model: UiSessionModel): HTMLElement {
  const pane = el("div", "pane logs-pane");
  pane.appendChild(el("h2", "", "program output"));
  pane.appendChild(el("pre", "output", model.output));
  pane.appendChild(el("h2", "", "events"));
  const log = el("ul", "event-log");
  model.eventLog.forEach((entry) => log.appendChild(el("li", "", entry)));
  pane.appendChild(log);
  return pane;
}

export function render(root: HTMLElement, model: UiSessionModel, handlers: UiHandlers): void {
  root.textContent = "";
  root.appendChild(renderStatus(model));
  root.appendChild(renderControls(model, handlers));
  const columns = el("div", "columns");
  columns.appendChild(renderSource(model));
  const side = el("div", "side");
  side.appendChild(renderStack(model, handlers));
  side.appendChild(renderVariables(model));
  columns.appendChild(side);
  root.appendChild(columns);
  root.appendChild(renderLogs(model));
}
