import { beforeEach, describe, expect, it, vi } from "vitest";
import { ApiClient, CallSession, GatewayEvent, SpeedDialEntry } from "../src/api";
import { EventPoller } from "../src/poller";
import { TelecomPanel } from "../src/telecom";

function makeCall(overrides: Partial<CallSession> = {}): CallSession {
  return {
    session_id: "c1", caller: "u2", callee: "u1", state: "ringing",
    created_at: 1, answered_at: null, ended_at: null, ...overrides,
  };
}

function makePanel(entries: SpeedDialEntry[] = []) {
  const api = new ApiClient();
  api.userId = "u1";
  api.username = "amy";
  api.listSpeedDial = vi.fn(async () => entries);
  api.listUsers = vi.fn(async () => [
    { user_id: "u1", username: "amy" },
    { user_id: "u2", username: "bob" },
  ]);
  api.getPresence = vi.fn(async (uid: string) =>
    ({ user_id: uid, status: "available" as const, note: "", updated_at: 0 }));
  const poller = new EventPoller(api);
  const panel = new TelecomPanel(api, poller);
  const fire = (kind: GatewayEvent["kind"], payload: any) =>
    (poller as any).dispatch({ event_id: 1, recipient: "u1", kind, payload, created_at: 0 });
  return { api, panel, fire };
}

describe("TelecomPanel", () => {
  let el: HTMLElement;

  beforeEach(() => {
    document.body.innerHTML = "";
    el = document.createElement("div");
    document.body.append(el);
  });

  it("renders every speed-dial slot with a presence dot", async () => {
    const entries = Array.from({ length: 10 }, (_, i) => ({
      owner: "u1", slot: i + 1, target: "u2", label: `Friend ${i + 1}`,
    }));
    const { panel } = makePanel(entries);
    await panel.load();
    panel.renderEnabler(el, "call");
    const items = el.querySelectorAll(".speed-dial li");
    expect(items).toHaveLength(10);
    expect(el.querySelectorAll(".presence-dot.available")).toHaveLength(10);
    expect(items[0].textContent).toContain("Friend 1");
  });

  it("shows an answer/reject prompt on an incoming call", async () => {
    const { api, panel, fire } = makePanel();
    api.answerCall = vi.fn(async () => makeCall({ state: "active" }));
    await panel.load();
    panel.renderEnabler(el, "call");
    expect(el.querySelector(".incoming-call")).toBeNull();

    fire("incoming_call", makeCall());
    const prompt = el.querySelector(".incoming-call")!;
    expect(prompt.textContent).toContain("u2");

    (prompt.querySelector(".answer") as HTMLButtonElement).click();
    await new Promise((r) => setTimeout(r, 0));
    expect(api.answerCall).toHaveBeenCalledWith("c1");
    expect(el.querySelector(".incoming-call")).toBeNull();
    expect(el.querySelector(".call-status")?.textContent).toBe("Call active");
  });

  it("clears the call view when the peer hangs up", async () => {
    const { panel, fire } = makePanel();
    await panel.load();
    panel.renderEnabler(el, "call");
    fire("incoming_call", makeCall());
    fire("call_state_changed", makeCall({ state: "active" }));
    expect(el.querySelector(".call-status")).not.toBeNull();
    fire("call_state_changed", makeCall({ state: "terminated" }));
    expect(el.querySelector(".call-status")).toBeNull();
  });

  it("appends incoming messages to the sender's thread in order", async () => {
    const { panel, fire } = makePanel();
    await panel.load();
    panel.renderEnabler(el, "im");
    const msg = (seq: number, body: string) => ({
      message_id: `m${seq}`, from: "u2", to: "u1", body, sent_at: seq, seq,
    });
    fire("message", msg(1, "first"));
    fire("message", msg(2, "second"));
    const lines = [...el.querySelectorAll('[data-peer="u2"] p')].map((p) => p.textContent);
    expect(lines).toEqual(["first", "second"]);
  });

  it("updates presence dots live", async () => {
    const { panel, fire } = makePanel([{ owner: "u1", slot: 1, target: "u2", label: "Bob" }]);
    await panel.load();
    panel.renderEnabler(el, "call");
    expect(el.querySelector(".presence-dot.available")).not.toBeNull();
    fire("presence_changed", { user_id: "u2", status: "busy", note: "", updated_at: 1 });
    expect(el.querySelector(".presence-dot.busy")).not.toBeNull();
    expect(el.querySelector(".presence-dot.available")).toBeNull();
  });
});
