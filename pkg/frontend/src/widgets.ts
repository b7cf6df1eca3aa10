/**
 * Per-kind widget content renderers. Feed item text is inserted via
 * textContent (the gateway keeps entities verbatim, sanitizing is on us);
 * proxied pages live in a sandboxed frame whose links already point back
 * at the gateway.
 */

import { ApiClient, WidgetDescriptor, WidgetInstance } from "./api";
import { TelecomPanel } from "./telecom";

export interface WidgetServices {
  telecom: TelecomPanel;
}

export async function renderWidgetContent(
  el: HTMLElement,
  inst: WidgetInstance,
  desc: WidgetDescriptor | undefined,
  api: ApiClient,
  services: WidgetServices,
): Promise<void> {
  if (!desc) {
    el.textContent = "Unknown widget";
    return;
  }
  switch (desc.kind) {
    case "feed":
      return renderFeed(el, inst, desc, api);
    case "proxied_page":
      return renderProxiedPage(el, inst, desc, api);
    case "telecom_enabler":
      services.telecom.renderEnabler(el, desc.enabler ?? "profile");
      return;
    default:
      el.textContent = desc.name;
  }
}

async function renderFeed(el: HTMLElement, inst: WidgetInstance,
                          desc: WidgetDescriptor, api: ApiClient): Promise<void> {
  const cfg = { ...desc.default_config, ...inst.config };
  const url = cfg["source_url"] ?? desc.source_url;
  if (!url) {
    el.textContent = "No feed URL configured";
    return;
  }
  const feed = await api.getFeed(url);
  const limit = parseInt(cfg["limit"] ?? "10", 10) || 10;
  const list = document.createElement("ul");
  list.className = "feed-items";
  for (const item of feed.items.slice(0, limit)) {
    const li = document.createElement("li");
    if (item.link) {
      const a = document.createElement("a");
      // feed links route through the gateway like everything else
      a.href = api.proxyUrl(item.link);
      a.textContent = item.title || "(untitled)";
      a.dataset.moduleNav = "1";
      li.append(a);
    } else {
      li.textContent = item.title || "(untitled)";
    }
    if (item.summary) {
      const p = document.createElement("p");
      p.textContent = item.summary;
      li.append(p);
    }
    list.append(li);
  }
  el.textContent = "";
  el.append(list);
}

async function renderProxiedPage(el: HTMLElement, inst: WidgetInstance,
                                 desc: WidgetDescriptor, api: ApiClient): Promise<void> {
  const cfg = { ...desc.default_config, ...inst.config };
  const url = cfg["source_url"] ?? desc.source_url;
  if (!url) {
    el.textContent = "No page URL configured";
    return;
  }
  const frame = document.createElement("iframe");
  frame.className = "proxied-frame";
  frame.setAttribute("sandbox", "allow-same-origin");
  frame.src = api.proxyUrl(url);
  el.textContent = "";
  el.append(frame);
}
