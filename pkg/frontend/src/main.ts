/** Entry point: hash routing between the three console views.
 *
 * All state lives server-side or in the URL hash, so a refresh always
 * reconstructs the same console from the API.
 */

import { AnnotateView } from "./annotate_view.js";
import { ApiClient } from "./api.js";
import { CompareView } from "./compare_view.js";
import { QueryView } from "./query_view.js";

const ROUTES = ["query", "annotate", "compare"] as const;
type Route = (typeof ROUTES)[number];

function currentRoute(): Route {
  const hash = window.location.hash.replace(/^#\/?/, "");
  return (ROUTES as readonly string[]).includes(hash) ? (hash as Route) : "query";
}

export function startConsole(root: HTMLElement, api: ApiClient): void {
  root.innerHTML = `
    <header class="top">
      <h1>pgxrag review console</h1>
      <nav>
        <a href="#/query">Query</a>
        <a href="#/annotate">Annotate</a>
        <a href="#/compare">Compare</a>
      </nav>
      <span class="health"></span>
    </header>
    <main class="view-root"></main>`;

  const viewRoot = root.querySelector<HTMLElement>(".view-root")!;
  const health = root.querySelector<HTMLElement>(".health")!;
  void api
    .health()
    .then((h) => {
      health.textContent = `service ${h.version}`;
    })
    .catch(() => {
      health.textContent = "service unreachable";
    });

  const show = () => {
    const route = currentRoute();
    root
      .querySelectorAll("nav a")
      .forEach((a) =>
        a.classList.toggle("active", a.getAttribute("href") === `#/${route}`),
      );
    if (route === "annotate") {
      new AnnotateView(viewRoot, api, "rater-01").mount();
    } else if (route === "compare") {
      new CompareView(viewRoot, api).mount();
    } else {
      new QueryView(viewRoot, api).mount();
    }
  };
  window.addEventListener("hashchange", show);
  show();
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  startConsole(document.getElementById("app")!, new ApiClient(""));
}
