/**
 * Typed client for the gateway JSON API. One session token covers every
 * service family; it rides on the X-Session-Token header.
 */

export interface Tab {
  tab_id: string;
  owner: string;
  title: string;
  order: number;
}

export interface WidgetInstance {
  instance_id: string;
  owner: string;
  widget_id: string;
  tab_id: string;
  col: number;
  row: number;
  config: Record<string, string>;
}

export interface DashboardLayout {
  owner: string;
  tabs: Tab[];
  instances: WidgetInstance[];
  version: number;
}

export interface WidgetDescriptor {
  widget_id: string;
  name: string;
  kind: "feed" | "proxied_page" | "telecom_enabler" | "static";
  source_url: string | null;
  enabler: string | null;
  default_config: Record<string, string>;
  declares_unload_handler: boolean;
}

export interface FeedItem {
  title: string;
  link: string | null;
  published: number | null;
  summary: string;
  source_url: string;
  source_index: number;
}

export interface CallSession {
  session_id: string;
  caller: string;
  callee: string;
  state: "inviting" | "ringing" | "active" | "terminated" | "rejected" | "failed";
  created_at: number;
  answered_at: number | null;
  ended_at: number | null;
}

export interface ChatMessage {
  message_id: string;
  from: string;
  to: string;
  body: string;
  sent_at: number;
  seq: number;
}

export interface PresenceState {
  user_id: string;
  status: "available" | "busy" | "offline";
  note: string;
  updated_at: number;
}

export interface SpeedDialEntry {
  owner: string;
  slot: number;
  target: string;
  label: string;
}

export interface GatewayEvent {
  event_id: number;
  recipient: string;
  kind: "incoming_call" | "call_state_changed" | "message" | "presence_changed";
  payload: any;
  created_at: number;
}

export interface UserRef {
  user_id: string;
  username: string;
}

export class ApiError extends Error {
  constructor(public code: string, message: string, public status: number) {
    super(message);
  }
}

export class ApiClient {
  token: string | null = null;
  userId: string | null = null;
  username: string | null = null;

  constructor(public baseUrl: string = "") {}

  private async call<T>(method: string, path: string, body?: unknown): Promise<T> {
    const headers: Record<string, string> = {};
    if (this.token) headers["X-Session-Token"] = this.token;
    if (body !== undefined) headers["Content-Type"] = "application/json";
    const resp = await fetch(this.baseUrl + path, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const data = await resp.json().catch(() => ({}));
    if (!resp.ok) {
      throw new ApiError(data.code ?? "unknown", data.message ?? resp.statusText, resp.status);
    }
    return data as T;
  }

  // ---- auth ----

  async register(username: string, password: string): Promise<string> {
    const r = await this.call<{ user_id: string }>("POST", "/api/register", { username, password });
    return r.user_id;
  }

  async login(username: string, password: string): Promise<void> {
    const r = await this.call<{ token: string; user_id: string; username: string }>(
      "POST", "/api/login", { username, password });
    this.token = r.token;
    this.userId = r.user_id;
    this.username = r.username;
  }

  async logout(): Promise<void> {
    await this.call("POST", "/api/logout", {});
    this.token = null;
    this.userId = null;
  }

  listUsers(): Promise<UserRef[]> {
    return this.call<{ users: UserRef[] }>("GET", "/api/users").then((r) => r.users);
  }

  // ---- dashboard ----

  getDashboard(): Promise<DashboardLayout> {
    return this.call("GET", "/api/dashboard");
  }

  listWidgets(): Promise<WidgetDescriptor[]> {
    return this.call<{ widgets: WidgetDescriptor[] }>("GET", "/api/widgets")
      .then((r) => r.widgets);
  }

  addWidget(tabId: string, widgetId: string, col: number, row: number,
            config?: Record<string, string>): Promise<WidgetInstance> {
    return this.call("POST", "/api/dashboard/widgets",
      { tab_id: tabId, widget_id: widgetId, col, row, config });
  }

  moveWidget(instanceId: string, tabId: string, col: number, row: number): Promise<WidgetInstance> {
    return this.call("PATCH", `/api/dashboard/widgets/${instanceId}`,
      { tab_id: tabId, col, row });
  }

  configureWidget(instanceId: string, config: Record<string, string>): Promise<WidgetInstance> {
    return this.call("PATCH", `/api/dashboard/widgets/${instanceId}`, { config });
  }

  removeWidget(instanceId: string): Promise<void> {
    return this.call("DELETE", `/api/dashboard/widgets/${instanceId}`);
  }

  createTab(title: string): Promise<Tab> {
    return this.call("POST", "/api/dashboard/tabs", { title });
  }

  deleteTab(tabId: string, cascade = false): Promise<void> {
    return this.call("DELETE", `/api/dashboard/tabs/${tabId}?cascade=${cascade}`);
  }

  // ---- feeds / proxy ----

  getFeed(url: string): Promise<{ title: string; items: FeedItem[] }> {
    return this.call("GET", `/api/feed?url=${encodeURIComponent(url)}`);
  }

  getMergedFeed(limit = 20): Promise<FeedItem[]> {
    return this.call<{ items: FeedItem[] }>("GET", `/api/feed/merged?limit=${limit}`)
      .then((r) => r.items);
  }

  proxyUrl(target: string): string {
    return `${this.baseUrl}/proxy.php?url=${encodeURIComponent(target)}`;
  }

  // ---- telecom ----

  setPresence(status: PresenceState["status"], note = ""): Promise<PresenceState> {
    return this.call("POST", "/api/presence", { status, note });
  }

  getPresence(userId: string): Promise<PresenceState> {
    return this.call("GET", `/api/presence/${userId}`);
  }

  sendMessage(to: string, body: string): Promise<ChatMessage> {
    return this.call("POST", "/api/messages", { to, body });
  }

  listMessages(peer: string): Promise<ChatMessage[]> {
    return this.call<{ messages: ChatMessage[] }>("GET", `/api/messages?peer=${peer}`)
      .then((r) => r.messages);
  }

  placeCall(callee: string): Promise<CallSession> {
    return this.call("POST", "/api/calls", { callee });
  }

  answerCall(sessionId: string): Promise<CallSession> {
    return this.call("POST", `/api/calls/${sessionId}/answer`);
  }

  rejectCall(sessionId: string): Promise<CallSession> {
    return this.call("POST", `/api/calls/${sessionId}/reject`);
  }

  hangup(sessionId: string): Promise<CallSession> {
    return this.call("POST", `/api/calls/${sessionId}/hangup`);
  }

  pollEvents(cursor: number, waitMs: number): Promise<{ events: GatewayEvent[]; next_cursor: number }> {
    return this.call("GET", `/api/events?cursor=${cursor}&wait_ms=${waitMs}`);
  }

  // ---- speed dial ----

  listSpeedDial(): Promise<SpeedDialEntry[]> {
    return this.call<{ entries: SpeedDialEntry[] }>("GET", "/api/speeddial")
      .then((r) => r.entries);
  }

  addSpeedDial(slot: number, target: string, label: string): Promise<SpeedDialEntry> {
    return this.call("POST", "/api/speeddial", { slot, target, label });
  }

  removeSpeedDial(slot: number): Promise<void> {
    return this.call("DELETE", `/api/speeddial/${slot}`);
  }
}
