/**
 * Browser entry point: login form, then the tabbed dashboard wired to the
 * event poller and telecom panel.
 */

import { ApiClient } from "./api";
import { DashboardGrid } from "./grid";
import { EventPoller } from "./poller";
import { TelecomPanel } from "./telecom";

function showError(el: HTMLElement, message: string): void {
  el.textContent = message;
  el.hidden = !message;
}

export async function boot(root: HTMLElement, baseUrl = ""): Promise<void> {
  const api = new ApiClient(baseUrl);

  root.textContent = "";
  const form = document.createElement("form");
  form.className = "login";
  form.innerHTML = `
    <h1>Dashboard</h1>
    <input name="username" placeholder="username" autocomplete="username">
    <input name="password" type="password" placeholder="password" autocomplete="current-password">
    <button type="submit" name="login">Sign in</button>
    <button type="button" name="register">Register</button>
    <p class="form-error" hidden></p>
  `;
  root.append(form);

  const errorLine = form.querySelector<HTMLElement>(".form-error")!;
  const username = form.querySelector<HTMLInputElement>("[name=username]")!;
  const password = form.querySelector<HTMLInputElement>("[name=password]")!;

  const enterDashboard = async () => {
    root.textContent = "";

    const banner = document.createElement("div");
    banner.className = "banner";
    const who = document.createElement("span");
    who.textContent = api.username ?? "";
    const errors = document.createElement("span");
    errors.className = "banner-error";
    const signout = document.createElement("button");
    signout.type = "button";
    signout.textContent = "Sign out";
    banner.append(who, errors, signout);

    const gridRoot = document.createElement("main");
    gridRoot.className = "dashboard";
    root.append(banner, gridRoot);

    const poller = new EventPoller(api, window.sessionStorage);
    const telecom = new TelecomPanel(api, poller);
    const grid = new DashboardGrid(gridRoot, api, { telecom }, {
      onError: (message) => {
        errors.textContent = message;
        setTimeout(() => { errors.textContent = ""; }, 4000);
      },
    });

    signout.addEventListener("click", async () => {
      await poller.stop();
      await api.logout().catch(() => undefined);
      void boot(root, baseUrl);
    });

    await telecom.load();
    await grid.refresh();
    // widgets re-render from server state when telecom events land
    poller.on("*", () => void 0);
    poller.start();
  };

  form.addEventListener("submit", async (e) => {
    e.preventDefault();
    try {
      await api.login(username.value, password.value);
      await enterDashboard();
    } catch (err: any) {
      showError(errorLine, err.message ?? "Login failed");
    }
  });

  form.querySelector("[name=register]")!.addEventListener("click", async () => {
    try {
      await api.register(username.value, password.value);
      await api.login(username.value, password.value);
      await enterDashboard();
    } catch (err: any) {
      showError(errorLine, err.message ?? "Registration failed");
    }
  });
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  void boot(document.getElementById("app")!);
}
