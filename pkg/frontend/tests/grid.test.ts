import { beforeEach, describe, expect, it, vi } from "vitest";
import { ApiClient, DashboardLayout, WidgetDescriptor } from "../src/api";
import { DashboardGrid } from "../src/grid";
import { WidgetServices } from "../src/widgets";

const CATALOG: WidgetDescriptor[] = [
  { widget_id: "profile", name: "Profile", kind: "telecom_enabler", source_url: null,
    enabler: "profile", default_config: {}, declares_unload_handler: false },
  { widget_id: "news-feed", name: "News", kind: "feed",
    source_url: "http://fixtures.local/news.rss",
    enabler: null, default_config: {}, declares_unload_handler: false },
];

function makeLayout(): DashboardLayout {
  return {
    owner: "u1",
    tabs: [
      { tab_id: "t1", owner: "u1", title: "Home", order: 0 },
      { tab_id: "t2", owner: "u1", title: "Work", order: 1 },
    ],
    instances: [
      { instance_id: "i1", owner: "u1", widget_id: "profile", tab_id: "t1",
        col: 0, row: 0, config: {} },
      { instance_id: "i2", owner: "u1", widget_id: "news-feed", tab_id: "t1",
        col: 1, row: 0, config: {} },
      { instance_id: "i3", owner: "u1", widget_id: "profile", tab_id: "t2",
        col: 0, row: 0, config: {} },
    ],
    version: 3,
  };
}

function makeApi(layout: DashboardLayout): ApiClient {
  const api = new ApiClient();
  api.userId = "u1";
  api.username = "amy";
  api.getDashboard = vi.fn(async () => layout);
  api.listWidgets = vi.fn(async () => CATALOG);
  api.getFeed = vi.fn(async () => ({ title: "News", items: [] }));
  return api;
}

function makeServices(): WidgetServices {
  return { telecom: { renderEnabler: vi.fn() } as any };
}

async function settle(): Promise<void> {
  await new Promise((r) => setTimeout(r, 0));
}

describe("DashboardGrid", () => {
  let root: HTMLElement;

  beforeEach(() => {
    document.body.innerHTML = "";
    root = document.createElement("div");
    document.body.append(root);
  });

  it("renders only the active tab's widgets", async () => {
    const grid = new DashboardGrid(root, makeApi(makeLayout()), makeServices());
    await grid.refresh();
    const ids = [...root.querySelectorAll<HTMLElement>(".widget")]
      .map((w) => w.dataset.instanceId);
    expect(ids).toEqual(["i1", "i2"]);
  });

  it("switches tabs in place without navigating", async () => {
    const grid = new DashboardGrid(root, makeApi(makeLayout()), makeServices());
    await grid.refresh();
    const href = window.location.href;
    const workTab = [...root.querySelectorAll<HTMLElement>(".tab")]
      .find((b) => b.textContent === "Work")!;
    const click = new MouseEvent("click", { bubbles: true, cancelable: true });
    workTab.dispatchEvent(click);
    expect(click.defaultPrevented).toBe(true);
    expect(window.location.href).toBe(href);
    const ids = [...root.querySelectorAll<HTMLElement>(".widget")]
      .map((w) => w.dataset.instanceId);
    expect(ids).toEqual(["i3"]);
  });

  it("isolates a widget failure from its siblings", async () => {
    const api = makeApi(makeLayout());
    api.getFeed = vi.fn(async () => { throw new Error("upstream down"); });
    const grid = new DashboardGrid(root, api, makeServices());
    await grid.refresh();
    await settle();
    const broken = root.querySelector('[data-instance-id="i2"] .widget-error');
    expect(broken?.textContent).toContain("upstream down");
    // the profile widget still rendered
    const profile = root.querySelector('[data-instance-id="i1"]');
    expect(profile).not.toBeNull();
    expect(profile!.querySelector(".widget-error")).toBeNull();
  });

  it("snaps a widget back when a move is rejected", async () => {
    const layout = makeLayout();
    const api = makeApi(layout);
    api.moveWidget = vi.fn(async () => {
      throw new Error("cell occupied");
    });
    const errors: string[] = [];
    const grid = new DashboardGrid(root, api, makeServices(), {
      onError: (m) => errors.push(m),
    });
    await grid.refresh();

    const target = root.querySelector<HTMLElement>('[data-col="2"][data-row="2"]')!;
    const dt = {
      getData: () => "i1",
      setData: () => undefined,
    };
    const drop = new Event("drop", { bubbles: true, cancelable: true }) as any;
    drop.dataTransfer = dt;
    target.dispatchEvent(drop);
    await settle();

    expect(errors).toEqual(["cell occupied"]);
    // re-rendered from the unchanged server layout: i1 stays at (0,0)
    const cell = root.querySelector('[data-col="0"][data-row="0"] .widget') as HTMLElement;
    expect(cell.dataset.instanceId).toBe("i1");
  });

  it("adds from the catalog into the first free cell", async () => {
    const api = makeApi(makeLayout());
    api.addWidget = vi.fn(async () => ({} as any));
    const grid = new DashboardGrid(root, api, makeServices());
    await grid.refresh();
    const entry = [...root.querySelectorAll<HTMLElement>(".catalog-entry")]
      .find((b) => b.textContent === "News")!;
    entry.click();
    await settle();
    // (0,0) and (1,0) are taken on the active tab, so (2,0) is next
    expect(api.addWidget).toHaveBeenCalledWith("t1", "news-feed", 2, 0);
  });
});
