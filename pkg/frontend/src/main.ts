// App bootstrap: hash routing between board / editor / review, 2-second
// status polling, and the offline banner.

import { ApiClient, OfflineError } from "./api.js";
import { boardRows, isEmptyState, progressCounter } from "./board.js";
import { EditorView } from "./editor.js";
import { ReviewView } from "./review.js";

const api = new ApiClient("");
const root = document.getElementById("app")!;
const banner = document.getElementById("offline-banner")!;

let pollTimer: number | undefined;

function setOffline(offline: boolean): void {
  banner.classList.toggle("hidden", !offline);
}

document.getElementById("offline-retry")!.onclick = () => route();

async function showBoard(): Promise<void> {
  let sequences;
  try {
    sequences = await api.listSequences();
    setOffline(false);
  } catch (error) {
    if (error instanceof OfflineError) {
      setOffline(true);
      return;
    }
    throw error;
  }

  root.innerHTML = "";
  const header = document.createElement("div");
  header.className = "board-header";
  const title = document.createElement("h1");
  title.textContent = "Sequences";
  const counter = document.createElement("span");
  counter.className = "counter";
  counter.textContent = progressCounter(sequences);
  header.append(title, counter);
  root.append(header);

  if (isEmptyState(sequences)) {
    const empty = document.createElement("p");
    empty.className = "empty";
    empty.textContent = "No sequences yet. Run the sequencing stage on a manifest first.";
    root.append(empty);
    return;
  }

  const list = document.createElement("ul");
  list.className = "board";
  for (const row of boardRows(sequences)) {
    const item = document.createElement("li");
    const link = document.createElement("a");
    link.href = row.action === "review" ? `#/review/${row.id}` : `#/edit/${row.id}`;
    link.textContent = `${row.id} (${row.size} images)`;
    const badge = document.createElement("span");
    badge.className = `badge ${row.status}`;
    badge.textContent = row.badge;
    item.append(link, badge);
    list.append(item);
  }
  root.append(list);
}

async function route(): Promise<void> {
  if (pollTimer !== undefined) {
    clearInterval(pollTimer);
    pollTimer = undefined;
  }
  const hash = location.hash;
  try {
    if (hash.startsWith("#/edit/")) {
      const revise = hash.endsWith("?revise");
      const id = decodeURIComponent(hash.slice("#/edit/".length).replace("?revise", ""));
      root.innerHTML = "<p class='hint'>loading editor…</p>";
      await new EditorView(api, root as HTMLElement, (seq) => {
        location.hash = `#/review/${seq}`;
      }).open(id, revise);
    } else if (hash.startsWith("#/review/")) {
      const id = decodeURIComponent(hash.slice("#/review/".length));
      root.innerHTML = "<p class='hint'>loading review…</p>";
      await new ReviewView(api, root as HTMLElement, (seq) => {
        location.hash = `#/edit/${seq}?revise`;
      }).open(id);
    } else {
      await showBoard();
      // status refresh without reload: poll while the board is visible
      pollTimer = window.setInterval(showBoard, 2000);
    }
    setOffline(false);
  } catch (error) {
    if (error instanceof OfflineError) {
      setOffline(true);
    } else {
      root.innerHTML = `<p class="error">${String(error)}</p>`;
    }
  }
}

window.addEventListener("hashchange", route);
void route();
