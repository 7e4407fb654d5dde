// The session view is a pure function of the last server response: no
// semantic computation happens client-side, we only re-render what the
// animator said.

import type { MenuEntry, ServerResponse, StoreState } from "./protocol.js";

export interface SessionView {
  sessionId: number | null;
  kind: "idle" | "menu" | "terminated" | "deadlock" | "taulimit" | "error";
  menu: MenuEntry[];
  trace: string[];
  state: StoreState;
  tauBanner: boolean;
  taus: number | null;
  terminalValue: string | null;
  errorMessage: string | null;
  errorCode: string | null;
}

export const idleView: SessionView = {
  sessionId: null,
  kind: "idle",
  menu: [],
  trace: [],
  state: null,
  tauBanner: false,
  taus: null,
  terminalValue: null,
  errorMessage: null,
  errorCode: null,
};

/** Build the view for one server response.  An error response keeps the
 * previous view's session contents (the session is unchanged server-side)
 * and only sets the error banner. */
export function viewFromResponse(
  sessionId: number | null,
  response: ServerResponse,
  previous: SessionView = idleView,
): SessionView {
  if (response.status === "error") {
    return {
      ...previous,
      sessionId,
      errorMessage: response.message,
      errorCode: response.code,
    };
  }
  const base: SessionView = {
    sessionId,
    kind: response.status,
    menu: [],
    trace: response.trace ?? [],
    state: response.state ?? null,
    tauBanner: false,
    taus: null,
    terminalValue: null,
    errorMessage: null,
    errorCode: null,
  };
  switch (response.status) {
    case "menu":
      return { ...base, menu: response.events };
    case "terminated":
      return { ...base, terminalValue: JSON.stringify(response.value) };
    case "deadlock":
      return base;
    case "taulimit":
      return { ...base, tauBanner: true, taus: response.taus };
  }
}

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function renderState(state: StoreState): string {
  if (state === null) {
    return `<p class="state muted">no state to display</p>`;
  }
  const rows = Object.entries(state)
    .map(
      ([name, value]) =>
        `<tr><td class="var">${escapeHtml(name)}</td>` +
        `<td class="val">${escapeHtml(JSON.stringify(value))}</td></tr>`,
    )
    .join("");
  return `<table class="state">${rows}</table>`;
}

function renderTrace(trace: string[]): string {
  if (trace.length === 0) {
    return `<p class="trace muted">no events yet</p>`;
  }
  const items = trace
    .map((label) => `<li>${escapeHtml(label)}</li>`)
    .join("");
  return `<ol class="trace">${items}</ol>`;
}

/** Render the view as HTML.  Only menu entries present in the last server
 * response become clickable buttons. */
export function renderHtml(view: SessionView): string {
  const parts: string[] = [];
  if (view.errorMessage !== null) {
    parts.push(
      `<div class="banner error">` +
        `${escapeHtml(view.errorMessage)} <code>${escapeHtml(view.errorCode ?? "")}</code>` +
        `</div>`,
    );
  }
  switch (view.kind) {
    case "idle":
      parts.push(`<p class="muted">load a model to begin</p>`);
      return parts.join("\n");
    case "menu": {
      const buttons = view.menu
        .map(
          (entry) =>
            `<button class="event" data-event-id="${entry.id}">` +
            `${escapeHtml(entry.label)}</button>`,
        )
        .join("");
      parts.push(`<div class="menu">${buttons}</div>`);
      break;
    }
    case "terminated":
      parts.push(
        `<div class="banner terminal">terminated with ` +
          `<code>${escapeHtml(view.terminalValue ?? "()")}</code></div>`,
      );
      break;
    case "deadlock":
      parts.push(`<div class="banner terminal">deadlock: no events are possible</div>`);
      break;
    case "taulimit":
      parts.push(
        `<div class="banner taulimit">${view.taus} internal steps without ` +
          `stabilising <button class="continue" data-action="continue">keep going</button></div>`,
      );
      break;
  }
  parts.push(`<section><h2>trace</h2>${renderTrace(view.trace)}</section>`);
  parts.push(`<section><h2>state</h2>${renderState(view.state)}</section>`);
  return parts.join("\n");
}
