// Wiring: one controller per page holding the latest SessionView.  A
// single request is in flight at any time; the menu is disabled while we
// wait so clicks cannot race.

import { AnimatorClient, SessionReply } from "./client.js";
import { SessionView, idleView, renderHtml, viewFromResponse } from "./view.js";

class Controller {
  private client = new AnimatorClient();
  private view: SessionView = idleView;
  private busy = false;

  constructor(
    private readonly root: HTMLElement,
    private readonly form: HTMLFormElement,
  ) {
    this.form.addEventListener("submit", (ev) => {
      ev.preventDefault();
      void this.load();
    });
    this.root.addEventListener("click", (ev) => {
      const target = ev.target as HTMLElement;
      const eventId = target.getAttribute("data-event-id");
      if (eventId !== null) {
        void this.pick(Number(eventId));
        return;
      }
      if (target.getAttribute("data-action") === "continue") {
        void this.continueTaus();
      }
    });
    this.render();
  }

  private render(): void {
    this.root.innerHTML = renderHtml(this.view);
    for (const button of this.root.querySelectorAll("button")) {
      (button as HTMLButtonElement).disabled = this.busy;
    }
  }

  private apply(reply: SessionReply): void {
    const id = reply.id ?? this.view.sessionId;
    this.view = viewFromResponse(id, reply.response, this.view);
    if (
      reply.response.status === "error" &&
      reply.response.code === "session_gone"
    ) {
      this.view = {
        ...idleView,
        errorMessage: "session is gone; load the model again",
        errorCode: "session_gone",
      };
    }
    this.render();
  }

  private async exclusive(action: () => Promise<SessionReply>): Promise<void> {
    if (this.busy) return;
    this.busy = true;
    this.render();
    try {
      this.apply(await action());
    } catch (err) {
      this.view = {
        ...this.view,
        errorMessage: String(err),
        errorCode: "network",
      };
    } finally {
      this.busy = false;
      this.render();
    }
  }

  private formValue(name: string): string {
    return (this.form.elements.namedItem(name) as HTMLInputElement).value.trim();
  }

  async load(): Promise<void> {
    const model = this.formValue("model");
    const target = this.formValue("target");
    const constsText = this.formValue("consts");
    let consts: Record<string, unknown> = {};
    if (constsText) {
      try {
        consts = JSON.parse(constsText);
      } catch {
        this.view = {
          ...this.view,
          errorMessage: "constants must be a JSON object",
          errorCode: "bad_consts",
        };
        this.render();
        return;
      }
    }
    const old = this.view.sessionId;
    if (old !== null) {
      await this.client.deleteSession(old).catch(() => undefined);
      this.view = idleView;
    }
    await this.exclusive(() => this.client.createSession(model, target, consts));
  }

  async pick(eventId: number): Promise<void> {
    const id = this.view.sessionId;
    if (id === null) return;
    await this.exclusive(() => this.client.choose(id, eventId));
  }

  async continueTaus(): Promise<void> {
    const id = this.view.sessionId;
    if (id === null) return;
    await this.exclusive(() => this.client.continueTaus(id));
  }
}

const root = document.getElementById("session");
const form = document.getElementById("loader");
if (root instanceof HTMLElement && form instanceof HTMLFormElement) {
  new Controller(root, form);
}
