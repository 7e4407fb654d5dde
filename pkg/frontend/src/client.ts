// Thin fetch wrapper over the animator HTTP API.  Every method resolves to
// the server's JSON payload, including error payloads (which carry
// status: "error" and a machine-readable code).

import type { ServerResponse, SessionHandle } from "./protocol.js";

export interface SessionReply {
  id: number | null;
  response: ServerResponse;
}

async function parse(resp: Response): Promise<SessionReply> {
  const body = await resp.json();
  if (body.status === "error") {
    return { id: null, response: body };
  }
  const handle = body as SessionHandle;
  return { id: handle.id, response: handle.prompt };
}

export class AnimatorClient {
  constructor(private readonly base: string = "") {}

  private async post(path: string, body?: unknown): Promise<SessionReply> {
    const resp = await fetch(this.base + path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: body === undefined ? null : JSON.stringify(body),
    });
    return parse(resp);
  }

  createSession(
    model: string,
    target: string,
    consts: Record<string, unknown> = {},
  ): Promise<SessionReply> {
    return this.post("/sessions", { model, target, consts });
  }

  async getSession(id: number): Promise<SessionReply> {
    const resp = await fetch(`${this.base}/sessions/${id}`);
    return parse(resp);
  }

  choose(id: number, eventId: number): Promise<SessionReply> {
    return this.post(`/sessions/${id}/choose`, { eventId });
  }

  continueTaus(id: number): Promise<SessionReply> {
    return this.post(`/sessions/${id}/continue`);
  }

  async deleteSession(id: number): Promise<void> {
    await fetch(`${this.base}/sessions/${id}`, { method: "DELETE" });
  }
}
