// The view-state machine behind the keyboard loop.  All term markup comes
// from server responses and is passed to the view verbatim; this module owns
// selection, revision discipline, and the conflict/retry paths, nothing else.

import { ApiClient, ApiError, CandidatePage, RuleInfo } from "./api.js";

export interface ViewState {
  sessionId: string | null;
  revision: number;
  termMarkup: string;
  rules: RuleInfo[];
  selectedRule: string | null;
  page: CandidatePage | null;
  selectedCandidate: number;
  status: string;
}

export interface ViewRenderer {
  showTerm(markup: string): void;
  showRules(rules: RuleInfo[], selected: string | null): void;
  showCandidate(view: { index: number; total: number; markup: string } | null): void;
  showStatus(text: string): void;
}

const emptyState = (): ViewState => ({
  sessionId: null,
  revision: 0,
  termMarkup: "",
  rules: [],
  selectedRule: null,
  page: null,
  selectedCandidate: 0,
  status: "",
});

export class Workbench {
  readonly state: ViewState = emptyState();
  /** Most recent keystroke-triggered operation; tests await it to settle. */
  lastAction: Promise<unknown> = Promise.resolve();
  private busy = false;

  constructor(
    private readonly client: ApiClient,
    private readonly view: ViewRenderer,
    readonly format: string = "mathml",
  ) {}

  private setStatus(text: string): void {
    this.state.status = text;
    this.view.showStatus(text);
  }

  private fail(err: unknown, doing: string): void {
    if (err instanceof ApiError) {
      this.setStatus(`${doing}: ${err.message}`);
    } else {
      this.setStatus(`${doing}: server unreachable`);
    }
  }

  private async refreshTerm(): Promise<void> {
    const session = this.state.sessionId!;
    const rendered = await this.client.render(session, this.format);
    this.state.revision = rendered.revision;
    this.state.termMarkup = rendered.rendered;
    this.view.showTerm(rendered.rendered);
  }

  private clearCandidates(): void {
    this.state.page = null;
    this.state.selectedCandidate = 0;
    this.view.showCandidate(null);
  }

  /** Create a fresh session (or attach to an existing one) and render it. */
  async loadSession(existingId?: string): Promise<void> {
    try {
      let id = existingId;
      if (!id) {
        const created = await this.client.createSession();
        id = created.id;
      }
      this.state.sessionId = id;
      const ruleList = await this.client.rules(id);
      this.state.rules = ruleList.rules;
      this.view.showRules(ruleList.rules, null);
      await this.refreshTerm();
      this.setStatus("ready; digits pick a rule, j/k cycle, Enter commits, u undoes");
    } catch (err) {
      this.state.sessionId = null;
      this.fail(err, "cannot load session");
    }
  }

  async submitTerm(text: string): Promise<void> {
    if (!this.state.sessionId || this.busy) return;
    this.busy = true;
    try {
      const accepted = await this.client.submitTerm(this.state.sessionId, text);
      this.state.revision = accepted.revision;
      this.clearCandidates();
      this.state.selectedRule = null;
      this.view.showRules(this.state.rules, null);
      await this.refreshTerm();
      this.setStatus(`term accepted (revision ${accepted.revision})`);
    } catch (err) {
      this.fail(err, "term rejected");
    } finally {
      this.busy = false;
    }
  }

  /** Pick a rule by palette position and fetch its candidate page. */
  async selectRule(position: number): Promise<void> {
    if (!this.state.sessionId) return;
    const rule = this.state.rules[position];
    if (!rule) {
      this.setStatus(`no rule ${position + 1} on the palette`);
      return;
    }
    this.state.selectedRule = rule.name;
    this.view.showRules(this.state.rules, rule.name);
    await this.fetchCandidates();
  }

  private async fetchCandidates(): Promise<void> {
    const session = this.state.sessionId!;
    const rule = this.state.selectedRule!;
    try {
      const page = await this.client.candidates(session, rule, [this.format]);
      this.state.revision = page.revision;
      this.state.page = page;
      this.state.selectedCandidate = 0;
      if (page.candidates.length === 0) {
        this.view.showCandidate(null);
        this.setStatus(`no matches for ${rule}`);
        return;
      }
      this.showSelected();
      const note = page.truncated ? " (truncated)" : "";
      this.setStatus(`${page.candidates.length} candidate(s) for ${rule}${note}`);
    } catch (err) {
      this.clearCandidates();
      this.fail(err, `cannot enumerate ${rule}`);
    }
  }

  private showSelected(): void {
    const page = this.state.page!;
    const candidate = page.candidates[this.state.selectedCandidate];
    this.view.showCandidate({
      index: this.state.selectedCandidate,
      total: page.candidates.length,
      markup: candidate.renderings[this.format],
    });
  }

  /** Move the selection cyclically and swap in that candidate's rendering. */
  cycleCandidate(direction: 1 | -1): void {
    const page = this.state.page;
    if (!page || page.candidates.length === 0) {
      this.setStatus("no matches");
      return;
    }
    const n = page.candidates.length;
    this.state.selectedCandidate = (this.state.selectedCandidate + direction + n) % n;
    this.showSelected();
  }

  /** Apply the selected candidate at the revision its page was computed at. */
  async commitChoice(): Promise<void> {
    const page = this.state.page;
    if (!this.state.sessionId || !page || page.candidates.length === 0) {
      this.setStatus("nothing selected; pick a rule first");
      return;
    }
    if (this.busy) return;
    this.busy = true;
    try {
      const applied = await this.client.apply(
        this.state.sessionId,
        page.rule,
        this.state.selectedCandidate,
        this.state.revision,
      );
      this.state.revision = applied.revision;
      this.clearCandidates();
      await this.refreshTerm();
      this.setStatus(`applied ${page.rule} (revision ${applied.revision})`);
    } catch (err) {
      if (err instanceof ApiError && err.code === "conflict") {
        // the term moved under us: resync, re-enumerate, tell the user
        await this.refreshTerm();
        await this.fetchCandidates();
        this.setStatus("term changed elsewhere; candidates re-enumerated");
      } else {
        this.fail(err, "apply failed");
      }
    } finally {
      this.busy = false;
    }
  }

  async undoLast(): Promise<void> {
    if (!this.state.sessionId || this.busy) return;
    this.busy = true;
    try {
      const undone = await this.client.undo(this.state.sessionId);
      this.state.revision = undone.revision;
      this.clearCandidates();
      await this.refreshTerm();
      this.setStatus(`undone (revision ${undone.revision})`);
    } catch (err) {
      this.fail(err, "cannot undo");
    } finally {
      this.busy = false;
    }
  }

  /**
   * The keystroke map: j/k (or arrows) cycle, digits pick rules, Enter
   * commits, u undoes.  All chosen to stay clear of browser-reserved chords.
   * Returns true when the key was consumed.
   */
  handleKey(key: string): Promise<boolean> {
    const work = this.dispatchKey(key);
    this.lastAction = work;
    return work;
  }

  private async dispatchKey(key: string): Promise<boolean> {
    if (key === "j" || key === "ArrowDown") {
      this.cycleCandidate(1);
      return true;
    }
    if (key === "k" || key === "ArrowUp") {
      this.cycleCandidate(-1);
      return true;
    }
    if (key >= "1" && key <= "9") {
      await this.selectRule(Number(key) - 1);
      return true;
    }
    if (key === "Enter") {
      await this.commitChoice();
      return true;
    }
    if (key === "u") {
      await this.undoLast();
      return true;
    }
    return false;
  }
}
