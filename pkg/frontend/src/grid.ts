/**
 * Tabbed widget grid. The server layout is the source of truth: every
 * gesture issues an API call and the grid re-renders from the response.
 * Tab switches and widget moves never navigate the page.
 */

import { ApiClient, DashboardLayout, WidgetDescriptor, WidgetInstance } from "./api";
import { renderWidgetContent, WidgetServices } from "./widgets";

export const GRID_COLS = 4;
export const GRID_ROWS = 6;

export interface GridCallbacks {
  onError?: (message: string) => void;
}

export class DashboardGrid {
  layout: DashboardLayout | null = null;
  activeTabId: string | null = null;
  catalog: WidgetDescriptor[] = [];

  constructor(private root: HTMLElement, private api: ApiClient,
              private services: WidgetServices,
              private callbacks: GridCallbacks = {}) {}

  async refresh(): Promise<void> {
    this.layout = await this.api.getDashboard();
    this.catalog = await this.api.listWidgets();
    const tabIds = this.layout.tabs.map((t) => t.tab_id);
    if (!this.activeTabId || !tabIds.includes(this.activeTabId)) {
      this.activeTabId = tabIds[0] ?? null;
    }
    this.render();
  }

  private descriptor(widgetId: string): WidgetDescriptor | undefined {
    return this.catalog.find((d) => d.widget_id === widgetId);
  }

  private reportError(message: string): void {
    this.callbacks.onError?.(message);
  }

  render(): void {
    if (!this.layout) return;
    this.root.textContent = "";
    this.root.append(this.renderTabBar(), this.renderGrid(), this.renderCatalog());
  }

  private renderTabBar(): HTMLElement {
    const bar = document.createElement("nav");
    bar.className = "tab-bar";
    const tabs = [...this.layout!.tabs].sort((a, b) => a.order - b.order);
    for (const tab of tabs) {
      const btn = document.createElement("button");
      btn.type = "button";
      btn.className = "tab" + (tab.tab_id === this.activeTabId ? " active" : "");
      btn.dataset.tabId = tab.tab_id;
      btn.textContent = tab.title;
      btn.addEventListener("click", (e) => {
        e.preventDefault(); // in-page switch, never a navigation
        this.activeTabId = tab.tab_id;
        this.render();
      });
      bar.append(btn);
    }
    const add = document.createElement("button");
    add.type = "button";
    add.className = "tab add-tab";
    add.textContent = "+";
    add.addEventListener("click", async () => {
      await this.api.createTab(`Tab ${this.layout!.tabs.length + 1}`)
        .catch((e) => this.reportError(e.message));
      await this.refresh();
    });
    bar.append(add);
    return bar;
  }

  private renderGrid(): HTMLElement {
    const grid = document.createElement("div");
    grid.className = "grid";
    const instances = this.layout!.instances
      .filter((i) => i.tab_id === this.activeTabId);
    const byCell = new Map(instances.map((i) => [`${i.col},${i.row}`, i]));
    for (let row = 0; row < GRID_ROWS; row++) {
      for (let col = 0; col < GRID_COLS; col++) {
        const cell = document.createElement("div");
        cell.className = "cell";
        cell.dataset.col = String(col);
        cell.dataset.row = String(row);
        const inst = byCell.get(`${col},${row}`);
        if (inst) {
          cell.append(this.renderWidget(inst));
        } else {
          this.makeDropTarget(cell, col, row);
        }
        grid.append(cell);
      }
    }
    return grid;
  }

  private makeDropTarget(cell: HTMLElement, col: number, row: number): void {
    cell.addEventListener("dragover", (e) => e.preventDefault());
    cell.addEventListener("drop", async (e) => {
      e.preventDefault();
      const instanceId = e.dataTransfer?.getData("text/instance-id");
      if (!instanceId) return;
      try {
        await this.api.moveWidget(instanceId, this.activeTabId!, col, row);
      } catch (err: any) {
        // occupied cell: widget snaps back on re-render
        this.reportError(err.message);
      }
      await this.refresh();
    });
  }

  private renderWidget(inst: WidgetInstance): HTMLElement {
    const desc = this.descriptor(inst.widget_id);
    const box = document.createElement("section");
    box.className = "widget";
    box.dataset.instanceId = inst.instance_id;
    box.draggable = true;
    box.addEventListener("dragstart", (e) => {
      e.dataTransfer?.setData("text/instance-id", inst.instance_id);
    });

    const head = document.createElement("header");
    const title = document.createElement("span");
    title.textContent = desc?.name ?? inst.widget_id;
    const close = document.createElement("button");
    close.type = "button";
    close.className = "remove";
    close.textContent = "×";
    close.addEventListener("click", async () => {
      await this.api.removeWidget(inst.instance_id)
        .catch((e) => this.reportError(e.message));
      await this.refresh();
    });
    head.append(title, close);

    const content = document.createElement("div");
    content.className = "widget-body";
    box.append(head, content);

    // widgets render and fail independently of their siblings
    renderWidgetContent(content, inst, desc, this.api, this.services)
      .catch((e: any) => {
        content.textContent = "";
        const err = document.createElement("p");
        err.className = "widget-error";
        err.textContent = `Failed to load: ${e.message ?? e}`;
        content.append(err);
      });
    return box;
  }

  private renderCatalog(): HTMLElement {
    const panel = document.createElement("aside");
    panel.className = "catalog";
    const heading = document.createElement("h2");
    heading.textContent = "Add a widget";
    panel.append(heading);
    for (const desc of this.catalog) {
      const btn = document.createElement("button");
      btn.type = "button";
      btn.className = "catalog-entry";
      btn.textContent = desc.name;
      btn.addEventListener("click", async () => {
        const cell = this.firstFreeCell();
        if (!cell) {
          this.reportError("No free cell on this tab");
          return;
        }
        await this.api.addWidget(this.activeTabId!, desc.widget_id, cell.col, cell.row)
          .catch((e) => this.reportError(e.message));
        await this.refresh();
      });
      panel.append(btn);
    }
    return panel;
  }

  firstFreeCell(): { col: number; row: number } | null {
    const taken = new Set(this.layout!.instances
      .filter((i) => i.tab_id === this.activeTabId)
      .map((i) => `${i.col},${i.row}`));
    for (let row = 0; row < GRID_ROWS; row++) {
      for (let col = 0; col < GRID_COLS; col++) {
        if (!taken.has(`${col},${row}`)) return { col, row };
      }
    }
    return null;
  }
}
