/**
 * Telecom side of the dashboard: speed dial, call prompt, conversation
 * view, and presence dots, all driven by the long-poll event stream.
 */

import { ApiClient, CallSession, ChatMessage, GatewayEvent, SpeedDialEntry, UserRef } from "./api";
import { EventPoller } from "./poller";

export class TelecomPanel {
  entries: SpeedDialEntry[] = [];
  users: UserRef[] = [];
  presence = new Map<string, string>();
  conversations = new Map<string, ChatMessage[]>();
  activeCall: CallSession | null = null;
  incomingCall: CallSession | null = null;

  private mounts: { el: HTMLElement; enabler: string }[] = [];

  constructor(private api: ApiClient, poller: EventPoller) {
    poller.on("incoming_call", (e) => this.onIncomingCall(e));
    poller.on("call_state_changed", (e) => this.onCallStateChanged(e));
    poller.on("message", (e) => this.onMessage(e));
    poller.on("presence_changed", (e) => this.onPresenceChanged(e));
  }

  async load(): Promise<void> {
    this.entries = await this.api.listSpeedDial();
    this.users = await this.api.listUsers();
    for (const entry of this.entries) {
      const p = await this.api.getPresence(entry.target).catch(() => null);
      if (p) this.presence.set(entry.target, p.status);
    }
  }

  // ---- event handlers ----

  private onIncomingCall(event: GatewayEvent): void {
    this.incomingCall = event.payload as CallSession;
    this.rerender();
  }

  private onCallStateChanged(event: GatewayEvent): void {
    const sess = event.payload as CallSession;
    if (this.activeCall?.session_id === sess.session_id || !this.activeCall) {
      this.activeCall = sess.state === "active" ? sess : null;
    }
    this.rerender();
  }

  private onMessage(event: GatewayEvent): void {
    const msg = event.payload as ChatMessage;
    this.appendMessage(msg.from, msg);
    this.rerender();
  }

  private onPresenceChanged(event: GatewayEvent): void {
    this.presence.set(event.payload.user_id, event.payload.status);
    this.rerender();
  }

  private appendMessage(peer: string, msg: ChatMessage): void {
    const thread = this.conversations.get(peer) ?? [];
    thread.push(msg);
    // events arrive in order, but a reload merges history: keep seq order per sender
    thread.sort((a, b) => (a.from === b.from ? a.seq - b.seq : a.sent_at - b.sent_at));
    this.conversations.set(peer, thread);
  }

  // ---- actions ----

  async dial(target: string): Promise<void> {
    const sess = await this.api.placeCall(target);
    if (sess.state === "ringing") this.activeCall = sess;
    this.rerender();
  }

  async answer(): Promise<void> {
    if (!this.incomingCall) return;
    this.activeCall = await this.api.answerCall(this.incomingCall.session_id);
    this.incomingCall = null;
    this.rerender();
  }

  async reject(): Promise<void> {
    if (!this.incomingCall) return;
    await this.api.rejectCall(this.incomingCall.session_id);
    this.incomingCall = null;
    this.rerender();
  }

  async hangup(): Promise<void> {
    if (!this.activeCall) return;
    await this.api.hangup(this.activeCall.session_id);
    this.activeCall = null;
    this.rerender();
  }

  async sendMessage(to: string, body: string): Promise<void> {
    const msg = await this.api.sendMessage(to, body);
    this.appendMessage(to, msg);
    this.rerender();
  }

  // ---- rendering ----

  renderEnabler(el: HTMLElement, enabler: string): void {
    this.mounts = this.mounts.filter((m) => m.el.isConnected);
    this.mounts.push({ el, enabler });
    this.renderInto(el, enabler);
  }

  private rerender(): void {
    this.mounts = this.mounts.filter((m) => m.el.isConnected);
    for (const m of this.mounts) this.renderInto(m.el, m.enabler);
  }

  private renderInto(el: HTMLElement, enabler: string): void {
    el.textContent = "";
    if (enabler === "profile") {
      el.append(this.renderProfile());
    } else if (enabler === "call") {
      el.append(this.renderSpeedDial(), this.renderCallState());
    } else {
      el.append(this.renderPresenceControls(), this.renderConversations());
    }
  }

  private renderProfile(): HTMLElement {
    const box = document.createElement("div");
    box.className = "profile";
    const name = document.createElement("p");
    name.textContent = `Signed in as ${this.api.username ?? "?"}`;
    box.append(name, this.renderPresenceControls());
    return box;
  }

  private renderPresenceControls(): HTMLElement {
    const box = document.createElement("div");
    box.className = "presence-controls";
    for (const status of ["available", "busy", "offline"] as const) {
      const btn = document.createElement("button");
      btn.type = "button";
      btn.textContent = status;
      btn.addEventListener("click", () => void this.api.setPresence(status));
      box.append(btn);
    }
    return box;
  }

  private renderSpeedDial(): HTMLElement {
    const list = document.createElement("ul");
    list.className = "speed-dial";
    const sorted = [...this.entries].sort((a, b) => a.slot - b.slot);
    for (const entry of sorted) {
      const li = document.createElement("li");
      li.dataset.slot = String(entry.slot);
      const dot = document.createElement("span");
      dot.className = `presence-dot ${this.presence.get(entry.target) ?? "offline"}`;
      const btn = document.createElement("button");
      btn.type = "button";
      btn.className = "dial";
      btn.textContent = `${entry.slot}. ${entry.label || entry.target}`;
      btn.addEventListener("click", () => void this.dial(entry.target));
      li.append(dot, btn);
      list.append(li);
    }
    return list;
  }

  private renderCallState(): HTMLElement {
    const box = document.createElement("div");
    box.className = "call-state";
    if (this.incomingCall) {
      const prompt = document.createElement("div");
      prompt.className = "incoming-call";
      const who = document.createElement("p");
      who.textContent = `Incoming call from ${this.incomingCall.caller}`;
      const yes = document.createElement("button");
      yes.type = "button";
      yes.className = "answer";
      yes.textContent = "Answer";
      yes.addEventListener("click", () => void this.answer());
      const no = document.createElement("button");
      no.type = "button";
      no.className = "reject";
      no.textContent = "Reject";
      no.addEventListener("click", () => void this.reject());
      prompt.append(who, yes, no);
      box.append(prompt);
    }
    if (this.activeCall) {
      const status = document.createElement("p");
      status.className = "call-status";
      status.dataset.state = this.activeCall.state;
      status.textContent = `Call ${this.activeCall.state}`;
      const end = document.createElement("button");
      end.type = "button";
      end.className = "hangup";
      end.textContent = "Hang up";
      end.addEventListener("click", () => void this.hangup());
      box.append(status, end);
    }
    return box;
  }

  private renderConversations(): HTMLElement {
    const box = document.createElement("div");
    box.className = "conversations";
    for (const [peer, msgs] of this.conversations) {
      const thread = document.createElement("div");
      thread.className = "thread";
      thread.dataset.peer = peer;
      for (const msg of msgs) {
        const line = document.createElement("p");
        line.className = msg.from === this.api.userId ? "mine" : "theirs";
        line.textContent = msg.body;
        thread.append(line);
      }
      box.append(thread);
    }
    const form = document.createElement("form");
    form.className = "composer";
    const to = document.createElement("select");
    for (const user of this.users.filter((u) => u.user_id !== this.api.userId)) {
      const opt = document.createElement("option");
      opt.value = user.user_id;
      opt.textContent = user.username;
      to.append(opt);
    }
    const input = document.createElement("input");
    input.name = "body";
    const send = document.createElement("button");
    send.type = "submit";
    send.textContent = "Send";
    form.append(to, input, send);
    form.addEventListener("submit", (e) => {
      e.preventDefault();
      if (to.value && input.value) {
        void this.sendMessage(to.value, input.value);
        input.value = "";
      }
    });
    box.append(form);
    return box;
  }
}
