// End-to-end: spawn the animator HTTP service and drive a buffer session
// through the client exactly as the page controller would.

import { ChildProcess, spawn } from "node:child_process";
import { mkdtempSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { AnimatorClient } from "../src/client.js";
import { idleView, renderHtml, viewFromResponse } from "../src/view.js";

let server: ChildProcess;
let base = "";
let scratch = "";

beforeAll(async () => {
  scratch = mkdtempSync(join(tmpdir(), "itree-ui-"));
  writeFileSync(
    join(scratch, "halt.itm"),
    "channel a : {0..0}\nprocess halt = a -> stop\n",
  );
  server = spawn("itree", ["serve", "--port", "0"], {
    stdio: ["ignore", "pipe", "pipe"],
  });
  base = await new Promise<string>((resolve, reject) => {
    const timer = setTimeout(() => reject(new Error("server did not start")), 15000);
    server.stdout!.on("data", (chunk: Buffer) => {
      const match = /listening on (http:\/\/[^/]+)\//.exec(chunk.toString());
      if (match) {
        clearTimeout(timer);
        resolve(match[1]);
      }
    });
    server.on("error", reject);
  });
}, 20000);

afterAll(() => {
  server?.kill();
  if (scratch) rmSync(scratch, { recursive: true, force: true });
});

describe("buffer session over HTTP", () => {
  it("loads, steps, rejects, and renders at every stage", async () => {
    const client = new AnimatorClient(base);

    let reply = await client.createSession("buffer", "buffer");
    expect(reply.id).not.toBeNull();
    const id = reply.id!;
    let view = viewFromResponse(id, reply.response);
    expect(view.kind).toBe("menu");
    expect(renderHtml(view)).toContain('data-event-id="0"');

    reply = await client.choose(id, 1);
    view = viewFromResponse(id, reply.response, view);
    expect(view.trace).toEqual(["Input.1"]);

    reply = await client.choose(id, 2);
    view = viewFromResponse(id, reply.response, view);
    expect(view.trace).toEqual(["Input.1", "Input.2"]);
    expect(view.state).toEqual({ buf: [1, 2] });
    expect(renderHtml(view)).toContain("Input.1</li>");

    // a disabled event is rejected and the view keeps the session state
    reply = await client.choose(id, 99);
    const rejected = viewFromResponse(id, reply.response, view);
    expect(rejected.errorCode).toBe("event_not_enabled");
    expect(rejected.trace).toEqual(view.trace);

    // picking the state event keeps driving the same session
    const stateEntry = view.menu.find((e) => e.label.startsWith("State"));
    reply = await client.choose(id, stateEntry!.id);
    view = viewFromResponse(id, reply.response, view);
    expect(view.trace).toHaveLength(3);

    await client.deleteSession(id);
    reply = await client.getSession(id);
    expect(reply.response.status).toBe("error");
  });

  it("shows the deadlock banner when the process halts", async () => {
    const client = new AnimatorClient(base);
    let reply = await client.createSession(join(scratch, "halt.itm"), "halt");
    const id = reply.id!;
    let view = viewFromResponse(id, reply.response);
    expect(view.kind).toBe("menu");
    reply = await client.choose(id, 0);
    view = viewFromResponse(id, reply.response, view);
    expect(view.kind).toBe("deadlock");
    expect(renderHtml(view)).toContain("deadlock");
    await client.deleteSession(id);
  });

  it("shows the termination banner for a terminating program", async () => {
    const client = new AnimatorClient(base);
    const reply = await client.createSession("reverse", "reverse");
    // reverse takes arguments; without them the server refuses to start
    expect(reply.response.status).toBe("error");

    const resp = await fetch(`${base}/sessions`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({
        model: "reverse",
        target: "reverse",
        args: [[1, 2, 3]],
      }),
    });
    const body = await resp.json();
    const view = viewFromResponse(body.id, body.prompt, idleView);
    expect(view.kind).toBe("terminated");
    expect(renderHtml(view)).toContain("terminated with");
  });
});
