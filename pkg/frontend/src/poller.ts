/**
 * Long-poll loop against /api/events. The cursor persists in session
 * storage so a page reload never replays already-seen events.
 */

import { ApiClient, GatewayEvent } from "./api";

export type EventHandler = (event: GatewayEvent) => void;

interface CursorStore {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
}

const CURSOR_KEY = "converge.eventCursor";
const WAIT_MS = 25000;
const ERROR_BACKOFF_MS = 2000;

export class EventPoller {
  private handlers = new Map<string, EventHandler[]>();
  private running = false;
  private loop: Promise<void> | null = null;
  cursor = 0;

  constructor(private api: ApiClient, private store: CursorStore | null = null,
              private waitMs: number = WAIT_MS) {
    const saved = store?.getItem(this.cursorKey());
    if (saved) this.cursor = parseInt(saved, 10) || 0;
  }

  private cursorKey(): string {
    return `${CURSOR_KEY}.${this.api.userId ?? "anon"}`;
  }

  on(kind: GatewayEvent["kind"] | "*", handler: EventHandler): void {
    const list = this.handlers.get(kind) ?? [];
    list.push(handler);
    this.handlers.set(kind, list);
  }

  private dispatch(event: GatewayEvent): void {
    for (const h of this.handlers.get(event.kind) ?? []) h(event);
    for (const h of this.handlers.get("*") ?? []) h(event);
  }

  /** One poll round; exposed for tests, used by the loop. */
  async pollOnce(waitMs = this.waitMs): Promise<GatewayEvent[]> {
    const r = await this.api.pollEvents(this.cursor, waitMs);
    this.cursor = r.next_cursor;
    this.store?.setItem(this.cursorKey(), String(this.cursor));
    for (const ev of r.events) this.dispatch(ev);
    return r.events;
  }

  start(): void {
    if (this.running) return;
    this.running = true;
    this.loop = (async () => {
      while (this.running) {
        try {
          await this.pollOnce();
        } catch (e) {
          if (!this.running) break;
          await new Promise((res) => setTimeout(res, ERROR_BACKOFF_MS));
        }
      }
    })();
  }

  async stop(): Promise<void> {
    this.running = false;
    await this.loop?.catch(() => undefined);
  }
}
