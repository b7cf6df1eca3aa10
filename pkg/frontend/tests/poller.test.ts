import { describe, expect, it, vi } from "vitest";
import { ApiClient, GatewayEvent } from "../src/api";
import { EventPoller } from "../src/poller";

function makeEvent(id: number, kind: GatewayEvent["kind"]): GatewayEvent {
  return { event_id: id, recipient: "u1", kind, payload: {}, created_at: 0 };
}

function makeApi(batches: GatewayEvent[][]): ApiClient {
  const api = new ApiClient();
  api.userId = "u1";
  let call = 0;
  api.pollEvents = vi.fn(async (cursor: number) => {
    const events = (batches[call++] ?? []).filter((e) => e.event_id > cursor);
    const next = events.length ? events[events.length - 1].event_id : cursor;
    return { events, next_cursor: next };
  });
  return api;
}

class MemoryStore {
  data = new Map<string, string>();
  getItem(k: string) { return this.data.get(k) ?? null; }
  setItem(k: string, v: string) { this.data.set(k, v); }
}

describe("EventPoller", () => {
  it("advances the cursor and dispatches by kind", async () => {
    const api = makeApi([[makeEvent(1, "message"), makeEvent(2, "presence_changed")]]);
    const poller = new EventPoller(api);
    const seen: number[] = [];
    const all: number[] = [];
    poller.on("message", (e) => seen.push(e.event_id));
    poller.on("*", (e) => all.push(e.event_id));
    await poller.pollOnce(0);
    expect(seen).toEqual([1]);
    expect(all).toEqual([1, 2]);
    expect(poller.cursor).toBe(2);
  });

  it("persists the cursor per user and restores it", async () => {
    const store = new MemoryStore();
    const api = makeApi([[makeEvent(5, "message")]]);
    const poller = new EventPoller(api, store);
    await poller.pollOnce(0);
    expect(store.getItem("converge.eventCursor.u1")).toBe("5");

    const revived = new EventPoller(makeApi([]), store);
    expect(revived.cursor).toBe(5);
  });

  it("never redelivers events at or below the cursor", async () => {
    const api = makeApi([
      [makeEvent(1, "message")],
      [makeEvent(1, "message"), makeEvent(2, "message")],
    ]);
    const poller = new EventPoller(api);
    const seen: number[] = [];
    poller.on("message", (e) => seen.push(e.event_id));
    await poller.pollOnce(0);
    await poller.pollOnce(0);
    expect(seen).toEqual([1, 2]);
  });

  it("leaves the cursor untouched when a poll fails", async () => {
    const api = new ApiClient();
    api.userId = "u1";
    let calls = 0;
    api.pollEvents = vi.fn(async (cursor: number) => {
      if (++calls === 1) throw new Error("boom");
      return { events: [makeEvent(3, "message")], next_cursor: 3 };
    });
    const poller = new EventPoller(api);
    await expect(poller.pollOnce(0)).rejects.toThrow("boom");
    expect(poller.cursor).toBe(0);
    await poller.pollOnce(0);
    expect(poller.cursor).toBe(3);
  });

  it("loops until stopped", async () => {
    const api = new ApiClient();
    api.userId = "u1";
    let calls = 0;
    api.pollEvents = vi.fn(async () => {
      calls++;
      await new Promise((r) => setTimeout(r, 5));
      return { events: [], next_cursor: 0 };
    });
    const poller = new EventPoller(api);
    poller.start();
    await new Promise((r) => setTimeout(r, 40));
    await poller.stop();
    const settled = calls;
    expect(settled).toBeGreaterThanOrEqual(2);
    await new Promise((r) => setTimeout(r, 20));
    expect(calls).toBe(settled);
  });
});
