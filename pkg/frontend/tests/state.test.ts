// View-state machine against a scripted fake client: selection, cycling,
// commit/conflict paths, revision discipline.  No DOM, no network.

import { describe, expect, it } from "vitest";

import {
  ApiClient,
  ApiError,
  CandidatePage,
  RuleInfo,
  TermResponse,
} from "../src/api.js";
import { ViewRenderer, Workbench } from "../src/state.js";

class RecordingView implements ViewRenderer {
  term = "";
  rules: RuleInfo[] = [];
  selectedRule: string | null = null;
  candidate: { index: number; total: number; markup: string } | null = null;
  status = "";

  showTerm(markup: string): void {
    this.term = markup;
  }
  showRules(rules: RuleInfo[], selected: string | null): void {
    this.rules = rules;
    this.selectedRule = selected;
  }
  showCandidate(view: { index: number; total: number; markup: string } | null): void {
    this.candidate = view;
  }
  showStatus(text: string): void {
    this.status = text;
  }
}

interface FakeOptions {
  candidateCount?: number;
  conflictsBeforeSuccess?: number;
  networkDown?: boolean;
}

class FakeClient implements ApiClient {
  revision = 0;
  term = "0";
  applyCalls: Array<{ candidate: number; revision: number }> = [];
  private conflictsLeft: number;

  constructor(private readonly options: FakeOptions = {}) {
    this.conflictsLeft = options.conflictsBeforeSuccess ?? 0;
  }

  private check(): void {
    if (this.options.networkDown) {
      throw new TypeError("fetch failed");
    }
  }

  async createSession() {
    this.check();
    return { id: "s1", revision: this.revision, rules: ["demo"] };
  }

  async submitTerm(_id: string, term: string): Promise<TermResponse> {
    this.check();
    this.term = term;
    this.revision += 1;
    return { revision: this.revision, term: { ascii: term } };
  }

  async rules(_id: string) {
    this.check();
    return {
      revision: this.revision,
      rules: [{ name: "demo", description: "demo rule", chains: 1 }],
    };
  }

  async candidates(_id: string, rule: string): Promise<CandidatePage> {
    this.check();
    const total = this.options.candidateCount ?? 2;
    return {
      revision: this.revision,
      rule,
      truncated: false,
      candidates: Array.from({ length: total }, (_, i) => ({
        index: i,
        summand: 0,
        spans: [[i, i + 2]],
        renderings: { mathml: `<math>candidate-${i}</math>` },
      })),
    };
  }

  async apply(_id: string, _rule: string, candidate: number, revision: number) {
    this.check();
    this.applyCalls.push({ candidate, revision });
    if (revision !== this.revision) {
      throw new ApiError(409, "conflict", "stale revision", this.revision);
    }
    if (this.conflictsLeft > 0) {
      this.conflictsLeft -= 1;
      this.revision += 1; // someone else moved the term
      throw new ApiError(409, "conflict", "stale revision", this.revision);
    }
    this.revision += 1;
    this.term = `applied-${candidate}`;
    return { revision: this.revision, term: { ascii: this.term } };
  }

  async undo(_id: string) {
    this.check();
    this.revision += 1;
    this.term = "undone";
    return { revision: this.revision, term: { ascii: this.term } };
  }

  async render(_id: string, format: string) {
    this.check();
    return {
      revision: this.revision,
      format,
      rendered: `<math>${this.term}</math>`,
    };
  }

  async history(_id: string) {
    this.check();
    return { revision: this.revision, base: "0", entries: [] };
  }
}

async function loadedBench(options: FakeOptions = {}) {
  const client = new FakeClient(options);
  const view = new RecordingView();
  const bench = new Workbench(client, view, "mathml");
  await bench.loadSession();
  return { client, view, bench };
}

describe("loading", () => {
  it("populates rules and the current term from the server", async () => {
    const { view } = await loadedBench();
    expect(view.rules.map((r) => r.name)).toEqual(["demo"]);
    expect(view.term).toBe("<math>0</math>");
    expect(view.status).toContain("ready");
  });

  it("surfaces a dead server in the status line and leaves the view blank", async () => {
    const { view, bench } = await loadedBench({ networkDown: true });
    expect(bench.state.sessionId).toBeNull();
    expect(view.term).toBe("");
    expect(view.status).toContain("unreachable");
  });
});

describe("candidate cycling", () => {
  it("cycles forward and wraps", async () => {
    const { bench, view } = await loadedBench({ candidateCount: 2 });
    await bench.handleKey("1");
    expect(view.candidate).toMatchObject({ index: 0, total: 2 });
    await bench.handleKey("j");
    expect(view.candidate).toMatchObject({ index: 1 });
    await bench.handleKey("j");
    expect(view.candidate).toMatchObject({ index: 0 });
    await bench.handleKey("k");
    expect(view.candidate).toMatchObject({ index: 1 });
  });

  it("shows every candidate of a 5-candidate page in 5 presses", async () => {
    const { bench, view } = await loadedBench({ candidateCount: 5 });
    await bench.handleKey("1");
    const seen = new Set<string>();
    seen.add(view.candidate!.markup);
    for (let i = 0; i < 4; i++) {
      await bench.handleKey("j");
      seen.add(view.candidate!.markup);
    }
    expect(seen.size).toBe(5);
  });

  it("reports no matches instead of crashing on an empty page", async () => {
    const { bench, view } = await loadedBench({ candidateCount: 0 });
    await bench.handleKey("1");
    expect(view.status).toContain("no matches");
    await bench.handleKey("j");
    expect(view.status).toBe("no matches");
    expect(view.candidate).toBeNull();
  });

  it("arrow keys work like j/k", async () => {
    const { bench, view } = await loadedBench({ candidateCount: 3 });
    await bench.handleKey("1");
    await bench.handleKey("ArrowDown");
    expect(view.candidate).toMatchObject({ index: 1 });
    await bench.handleKey("ArrowUp");
    expect(view.candidate).toMatchObject({ index: 0 });
  });
});

describe("committing", () => {
  it("applies the selected candidate and shows the new term", async () => {
    const { bench, view, client } = await loadedBench({ candidateCount: 2 });
    await bench.submitTerm("a adag");
    await bench.handleKey("1");
    await bench.handleKey("j");
    await bench.handleKey("Enter");
    expect(client.applyCalls).toHaveLength(1);
    expect(client.applyCalls[0].candidate).toBe(1);
    expect(view.term).toBe("<math>applied-1</math>");
    expect(view.candidate).toBeNull();
  });

  it("always sends the revision its candidate page was computed at", async () => {
    const { bench, client } = await loadedBench();
    await bench.submitTerm("x");
    await bench.submitTerm("y");
    await bench.handleKey("1");
    await bench.handleKey("Enter");
    expect(client.applyCalls[0].revision).toBe(2);
  });

  it("is a no-op with a hint when nothing is selected", async () => {
    const { bench, view, client } = await loadedBench();
    await bench.handleKey("Enter");
    expect(client.applyCalls).toHaveLength(0);
    expect(view.status).toContain("nothing selected");
  });

  it("re-enumerates on conflict and informs the user", async () => {
    const { bench, view, client } = await loadedBench({
      candidateCount: 2,
      conflictsBeforeSuccess: 1,
    });
    await bench.submitTerm("a");
    await bench.handleKey("1");
    await bench.handleKey("Enter");
    expect(view.status).toContain("candidates re-enumerated");
    expect(bench.state.revision).toBe(client.revision);
    expect(view.candidate).toMatchObject({ index: 0, total: 2 });
    // the retry now carries the fresh revision and succeeds
    await bench.handleKey("Enter");
    expect(view.term).toBe("<math>applied-0</math>");
  });
});

describe("undo", () => {
  it("reverts and re-renders", async () => {
    const { bench, view } = await loadedBench();
    await bench.submitTerm("a adag");
    await bench.handleKey("u");
    expect(view.term).toBe("<math>undone</math>");
  });
});

describe("key routing", () => {
  it("ignores unmapped keys", async () => {
    const { bench } = await loadedBench();
    expect(await bench.handleKey("x")).toBe(false);
    expect(await bench.handleKey("Escape")).toBe(false);
  });

  it("digits beyond the palette just set a status", async () => {
    const { bench, view, client } = await loadedBench();
    await bench.handleKey("9");
    expect(view.status).toContain("no rule 9");
    expect(client.applyCalls).toHaveLength(0);
  });
});
