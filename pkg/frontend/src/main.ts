// Browser wiring: DOM adapter, keyboard hookup, term input box.

import { Client, RuleInfo } from "./api.js";
import { ViewRenderer, Workbench } from "./state.js";

export class DomView implements ViewRenderer {
  private readonly term: HTMLElement;
  private readonly rules: HTMLElement;
  private readonly candidate: HTMLElement;
  private readonly status: HTMLElement;

  constructor(
    private readonly doc: Document,
    private readonly mathml: boolean,
  ) {
    this.term = doc.getElementById("term")!;
    this.rules = doc.getElementById("rules")!;
    this.candidate = doc.getElementById("candidate")!;
    this.status = doc.getElementById("status")!;
  }

  private inject(target: HTMLElement, markup: string): void {
    if (this.mathml) {
      // server-produced MathML, verbatim; the server is the only source of it
      target.innerHTML = markup;
    } else {
      target.textContent = markup;
    }
  }

  showTerm(markup: string): void {
    this.inject(this.term, markup);
  }

  showRules(rules: RuleInfo[], selected: string | null): void {
    this.rules.textContent = "";
    rules.forEach((rule, i) => {
      const entry = this.doc.createElement("div");
      entry.className = "rule" + (rule.name === selected ? " selected" : "");
      entry.textContent = `${i + 1}. ${rule.name}${rule.description ? " - " + rule.description : ""}`;
      this.rules.appendChild(entry);
    });
  }

  showCandidate(view: { index: number; total: number; markup: string } | null): void {
    this.candidate.textContent = "";
    if (view === null) {
      return;
    }
    const counter = this.doc.createElement("div");
    counter.className = "counter";
    counter.textContent = `candidate ${view.index + 1} of ${view.total}`;
    const markup = this.doc.createElement("div");
    markup.className = "highlighted";
    this.inject(markup, view.markup);
    this.candidate.appendChild(counter);
    this.candidate.appendChild(markup);
  }

  showStatus(text: string): void {
    this.status.textContent = text;
  }
}

export function mathmlSupported(win: Window & typeof globalThis): boolean {
  return typeof (win as { MathMLElement?: unknown }).MathMLElement !== "undefined";
}

/** Route keydown events to the workbench, leaving the term input box alone. */
export function installKeyboard(doc: Document, bench: Workbench): void {
  doc.addEventListener("keydown", (event: KeyboardEvent) => {
    const target = event.target as HTMLElement | null;
    if (target && target.tagName === "INPUT") {
      return;
    }
    if (event.ctrlKey || event.altKey || event.metaKey) {
      return;
    }
    void bench.handleKey(event.key);
    if (["j", "k", "ArrowDown", "ArrowUp", "Enter", "u"].includes(event.key) ||
        (event.key >= "1" && event.key <= "9")) {
      event.preventDefault();
    }
  });
}

export function installTermInput(doc: Document, bench: Workbench): void {
  const input = doc.getElementById("term-input") as HTMLInputElement | null;
  if (!input) return;
  input.addEventListener("keydown", (event: KeyboardEvent) => {
    if (event.key !== "Enter") return;
    event.preventDefault();
    const text = input.value.trim();
    if (text) {
      void bench.submitTerm(text);
      input.blur();
    }
  });
}

export async function boot(win: Window & typeof globalThis): Promise<Workbench> {
  const doc = win.document;
  const useMathml = mathmlSupported(win);
  // same origin by default; ?api=http://host:port points elsewhere (CORS is open)
  const apiBase = new URLSearchParams(win.location.search).get("api") ?? "";
  const client = new Client(apiBase, win.fetch.bind(win));
  const view = new DomView(doc, useMathml);
  const bench = new Workbench(client, view, useMathml ? "mathml" : "ascii");
  installKeyboard(doc, bench);
  installTermInput(doc, bench);
  await bench.loadSession();
  return bench;
}

declare global {
  interface Window {
    termclamp?: Workbench;
  }
}

if (typeof window !== "undefined" && typeof document !== "undefined" &&
    document.getElementById("term")) {
  void boot(window).then((bench) => {
    window.termclamp = bench;
  });
}
