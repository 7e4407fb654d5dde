// Snapshot tests: the view is a pure function of the last server
// response, pinned against transcripts recorded from the live protocol.

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";

import type { ServerResponse } from "../src/protocol.js";
import { SessionView, idleView, renderHtml, viewFromResponse } from "../src/view.js";

const here = dirname(fileURLToPath(import.meta.url));

interface Step {
  request: Record<string, unknown>;
  response: ServerResponse;
}

function transcript(name: string): Step[] {
  return JSON.parse(
    readFileSync(join(here, "..", "fixtures", `${name}.json`), "utf8"),
  );
}

function replay(steps: Step[]): SessionView[] {
  const views: SessionView[] = [];
  let view = idleView;
  for (const step of steps) {
    view = viewFromResponse(1, step.response, view);
    views.push(view);
  }
  return views;
}

describe("buffer transcript", () => {
  const steps = transcript("buffer_transcript");
  const views = replay(steps);

  it("renders the initial menu", () => {
    const first = views[0];
    expect(first.kind).toBe("menu");
    expect(first.menu.map((e) => e.label)).toEqual([
      "Input.0", "Input.1", "Input.2", "Input.3", "State.[]",
    ]);
    expect(renderHtml(first)).toMatchSnapshot();
  });

  it("extends the trace and state as events are chosen", () => {
    expect(views[1].trace).toEqual(["Input.1"]);
    expect(views[2].trace).toEqual(["Input.1", "Input.2"]);
    expect(views[2].state).toEqual({ buf: [1, 2] });
    expect(views[3].trace).toEqual(["Input.1", "Input.2", "State.[1, 2]"]);
    expect(renderHtml(views[2])).toMatchSnapshot();
  });

  it("keeps the session view on a rejected event, with an error banner", () => {
    const rejected = views[4];
    expect(rejected.errorCode).toBe("event_not_enabled");
    expect(rejected.trace).toEqual(views[3].trace);
    expect(rejected.menu).toEqual(views[3].menu);
    expect(renderHtml(rejected)).toMatchSnapshot();
  });

  it("only renders clickable ids that exist in the last server menu", () => {
    for (const view of views) {
      const html = renderHtml(view);
      const ids = [...html.matchAll(/data-event-id="(\d+)"/g)].map((m) =>
        Number(m[1]),
      );
      const menuIds = new Set(view.menu.map((e) => e.id));
      for (const id of ids) {
        expect(menuIds.has(id)).toBe(true);
      }
    }
  });
});

describe("terminal prompts", () => {
  it("renders the termination banner with the final value", () => {
    const [step] = transcript("terminated_transcript");
    const view = viewFromResponse(1, step.response);
    expect(view.kind).toBe("terminated");
    const html = renderHtml(view);
    expect(html).toContain("terminated with");
    expect(html).not.toContain("data-event-id");
    expect(html).toMatchSnapshot();
  });

  it("renders the deadlock banner with no buttons", () => {
    const steps = transcript("deadlock_transcript");
    const view = replay(steps).at(-1)!;
    expect(view.kind).toBe("deadlock");
    const html = renderHtml(view);
    expect(html).toContain("deadlock");
    expect(html).not.toContain("data-event-id");
    expect(html).toMatchSnapshot();
  });

  it("renders the tau-limit banner with a continue control", () => {
    const steps = transcript("taulimit_transcript");
    const view = replay(steps).at(-1)!;
    expect(view.kind).toBe("taulimit");
    expect(view.tauBanner).toBe(true);
    const html = renderHtml(view);
    expect(html).toContain("internal steps");
    expect(html).toContain('data-action="continue"');
    expect(html).toMatchSnapshot();
  });
});

describe("view purity", () => {
  it("identical responses produce identical views and markup", () => {
    const steps = transcript("buffer_transcript");
    const a = replay(steps);
    const b = replay(steps);
    expect(a).toEqual(b);
    expect(a.map(renderHtml)).toEqual(b.map(renderHtml));
  });
});
