// Wire types for the animator protocol.  The same prompt encoding is used
// by the stdio protocol and the HTTP API.

export interface MenuEntry {
  id: number;
  label: string;
}

export type StoreState = Record<string, unknown> | null;

export interface MenuResponse {
  status: "menu";
  events: MenuEntry[];
  trace: string[];
  state: StoreState;
}

export interface TerminatedResponse {
  status: "terminated";
  value: unknown;
  trace: string[];
  state: StoreState;
}

export interface DeadlockResponse {
  status: "deadlock";
  trace: string[];
  state: StoreState;
}

export interface TauLimitResponse {
  status: "taulimit";
  taus: number;
  trace: string[];
  state: StoreState;
}

export interface ErrorResponse {
  status: "error";
  message: string;
  code: string;
}

export type PromptResponse =
  | MenuResponse
  | TerminatedResponse
  | DeadlockResponse
  | TauLimitResponse;

export type ServerResponse = PromptResponse | ErrorResponse;

export interface SessionHandle {
  id: number;
  prompt: PromptResponse;
}
