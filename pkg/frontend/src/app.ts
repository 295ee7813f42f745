import {
  LabelServiceClient,
  ServiceError,
  type Estimate,
  type PoolItem,
  type Progress,
  type SessionConfig,
} from "./api.js";
import { BatchLabeler } from "./labeler.js";
import { estimateChart } from "./chart.js";
import { el, must } from "./dom.js";

/**
 * The labeling console: create/import a session, answer label queries batch
 * by batch with single keystrokes, watch the estimate band converge, export
 * the session document at any point.
 *
 * One session is active per tab. All state transitions go through the
 * service; the numbers on screen are echoed server fields, never client math.
 */

export type ClientFactory = (baseUrl: string) => LabelServiceClient;

type AppError = { code: string; message: string; retry: (() => void) | null };

type State = {
  screen: "create" | "label";
  client: LabelServiceClient | null;
  sessionId: string | null;
  progress: Progress | null;
  labeler: BatchLabeler | null;
  estimate: Estimate | null;
  inFlight: boolean;
  error: AppError | null;
  exportText: string;
};

const SKELETON = `
  <header class="top-bar">
    <h1>lowshot console</h1>
    <span data-testid="connection"></span>
  </header>

  <section data-testid="screen-create" class="screen">
    <h2>New session</h2>
    <label>Service URL
      <input data-testid="base-url" type="text" value="http://127.0.0.1:8000">
    </label>
    <label>Pool items (JSON: [{"id", "score", "predicted"}, …] or {"items": […]})
      <textarea data-testid="pool-json" rows="8" spellcheck="false"></textarea>
    </label>
    <div class="config-row">
      <label>Budget <input data-testid="budget" type="number" value="100" min="2"></label>
      <label>Seed <input data-testid="seed" type="number" value="0"></label>
      <label>Alpha <input data-testid="alpha" type="number" value="0.5" step="0.05" min="0" max="1"></label>
    </div>
    <button data-testid="start-session" type="button">Start session</button>
    <p data-testid="create-error" class="error-text" role="alert" hidden></p>

    <h2>Import session</h2>
    <label>Exported session document
      <textarea data-testid="import-json" rows="4" spellcheck="false"></textarea>
    </label>
    <button data-testid="import-session" type="button">Import</button>
  </section>

  <section data-testid="screen-label" class="screen" hidden>
    <div class="session-bar">
      <span>session <code data-testid="session-id"></code></span>
      <span data-testid="progress-labels"></span>
      <span data-testid="progress-iteration"></span>
      <span data-testid="progress-state" class="state-badge"></span>
      <button data-testid="leave-session" type="button">Leave</button>
    </div>

    <div data-testid="error-banner" class="error-banner" role="alert" hidden>
      <strong data-testid="error-code"></strong>
      <span data-testid="error-message"></span>
      <button data-testid="retry" type="button">Retry</button>
    </div>

    <div class="work-area">
      <div class="labeling-pane">
        <div data-testid="item-card" class="item-card"></div>
        <p class="keyboard-hint" data-testid="keyboard-hint">
          keys: <kbd>1</kbd> positive · <kbd>0</kbd> negative · <kbd>u</kbd> undo · <kbd>enter</kbd> submit
        </p>
        <div class="controls">
          <button data-testid="mark-positive" type="button">Positive (1)</button>
          <button data-testid="mark-negative" type="button">Negative (0)</button>
          <button data-testid="undo" type="button">Undo (u)</button>
          <button data-testid="submit" type="button" disabled>Submit batch (enter)</button>
        </div>
        <ol data-testid="batch-list" class="batch-list"></ol>
      </div>

      <div class="estimate-pane">
        <div class="readout">
          <span>g = <strong data-testid="estimate-g">—</strong></span>
          <span>variance = <strong data-testid="estimate-var">—</strong></span>
        </div>
        <div data-testid="chart-host" class="chart-host"></div>
        <ul data-testid="iteration-list" class="iteration-list"></ul>
      </div>
    </div>

    <div class="export-row">
      <button data-testid="export-session" type="button">Export session</button>
      <textarea data-testid="export-output" rows="4" readonly spellcheck="false"></textarea>
    </div>
  </section>
`;

export class ConsoleApp {
  private readonly state: State = {
    screen: "create",
    client: null,
    sessionId: null,
    progress: null,
    labeler: null,
    estimate: null,
    inFlight: false,
    error: null,
    exportText: "",
  };

  private readonly refs: {
    connection: HTMLElement;
    screenCreate: HTMLElement;
    screenLabel: HTMLElement;
    baseUrl: HTMLInputElement;
    poolJson: HTMLTextAreaElement;
    budget: HTMLInputElement;
    seed: HTMLInputElement;
    alpha: HTMLInputElement;
    startSession: HTMLButtonElement;
    createError: HTMLElement;
    importJson: HTMLTextAreaElement;
    importSession: HTMLButtonElement;
    sessionId: HTMLElement;
    progressLabels: HTMLElement;
    progressIteration: HTMLElement;
    progressState: HTMLElement;
    leaveSession: HTMLButtonElement;
    errorBanner: HTMLElement;
    errorCode: HTMLElement;
    errorMessage: HTMLElement;
    retry: HTMLButtonElement;
    itemCard: HTMLElement;
    markPositive: HTMLButtonElement;
    markNegative: HTMLButtonElement;
    undo: HTMLButtonElement;
    submit: HTMLButtonElement;
    batchList: HTMLOListElement;
    estimateG: HTMLElement;
    estimateVar: HTMLElement;
    chartHost: HTMLElement;
    iterationList: HTMLUListElement;
    exportSession: HTMLButtonElement;
    exportOutput: HTMLTextAreaElement;
  };

  private readonly keyHandler = (event: KeyboardEvent) => this.onKeydown(event);

  constructor(
    readonly root: HTMLElement,
    private readonly makeClient: ClientFactory,
    options: { baseUrl?: string } = {},
  ) {
    root.innerHTML = SKELETON;
    const byId = <T extends Element>(id: string): T =>
      must<T>(root, `[data-testid="${id}"]`);
    this.refs = {
      connection: byId("connection"),
      screenCreate: byId("screen-create"),
      screenLabel: byId("screen-label"),
      baseUrl: byId("base-url"),
      poolJson: byId("pool-json"),
      budget: byId("budget"),
      seed: byId("seed"),
      alpha: byId("alpha"),
      startSession: byId("start-session"),
      createError: byId("create-error"),
      importJson: byId("import-json"),
      importSession: byId("import-session"),
      sessionId: byId("session-id"),
      progressLabels: byId("progress-labels"),
      progressIteration: byId("progress-iteration"),
      progressState: byId("progress-state"),
      leaveSession: byId("leave-session"),
      errorBanner: byId("error-banner"),
      errorCode: byId("error-code"),
      errorMessage: byId("error-message"),
      retry: byId("retry"),
      itemCard: byId("item-card"),
      markPositive: byId("mark-positive"),
      markNegative: byId("mark-negative"),
      undo: byId("undo"),
      submit: byId("submit"),
      batchList: byId("batch-list"),
      estimateG: byId("estimate-g"),
      estimateVar: byId("estimate-var"),
      chartHost: byId("chart-host"),
      iterationList: byId("iteration-list"),
      exportSession: byId("export-session"),
      exportOutput: byId("export-output"),
    };
    if (options.baseUrl !== undefined) this.refs.baseUrl.value = options.baseUrl;

    this.refs.startSession.addEventListener("click", () => void this.startSession());
    this.refs.importSession.addEventListener("click", () => void this.importSession());
    this.refs.leaveSession.addEventListener("click", () => this.leaveSession());
    this.refs.markPositive.addEventListener("click", () => this.recordAnswer(1));
    this.refs.markNegative.addEventListener("click", () => this.recordAnswer(0));
    this.refs.undo.addEventListener("click", () => this.undoAnswer());
    this.refs.submit.addEventListener("click", () => void this.submitBatch());
    this.refs.retry.addEventListener("click", () => this.retryLastError());
    this.refs.exportSession.addEventListener("click", () => void this.exportSession());
    root.ownerDocument.addEventListener("keydown", this.keyHandler);

    this.render();
  }

  dispose(): void {
    this.root.ownerDocument.removeEventListener("keydown", this.keyHandler);
  }

  // -- user actions ----------------------------------------------------------

  private onKeydown(event: KeyboardEvent): void {
    if (this.state.screen !== "label") return;
    const target = event.target;
    if (
      target instanceof HTMLInputElement ||
      target instanceof HTMLTextAreaElement ||
      target instanceof HTMLSelectElement
    ) {
      return;
    }
    switch (event.key) {
      case "1":
        event.preventDefault();
        this.recordAnswer(1);
        break;
      case "0":
        event.preventDefault();
        this.recordAnswer(0);
        break;
      case "u":
      case "U":
        event.preventDefault();
        this.undoAnswer();
        break;
      case "Enter":
        event.preventDefault();
        void this.submitBatch();
        break;
      default:
        break;
    }
  }

  private recordAnswer(value: 0 | 1): void {
    if (this.state.inFlight || this.state.labeler === null) return;
    this.state.labeler.label(value);
    this.render();
  }

  private undoAnswer(): void {
    if (this.state.inFlight || this.state.labeler === null) return;
    this.state.labeler.undo();
    this.render();
  }

  async startSession(): Promise<void> {
    if (this.state.inFlight) return;
    this.refs.createError.hidden = true;
    let items: PoolItem[];
    try {
      items = parsePoolText(this.refs.poolJson.value);
    } catch (err) {
      this.showCreateError(err instanceof Error ? err.message : String(err));
      return;
    }
    const config: SessionConfig = { budget: Number(this.refs.budget.value) };
    const seed = this.refs.seed.value.trim();
    if (seed !== "") config.seed = Number(seed);
    const alpha = this.refs.alpha.value.trim();
    if (alpha !== "") config.alpha = Number(alpha);

    const client = this.makeClient(this.refs.baseUrl.value.trim());
    this.state.inFlight = true;
    this.render();
    try {
      const sessionId = await client.createSession(items, config);
      this.state.inFlight = false;
      await this.enterSession(client, sessionId);
    } catch (err) {
      this.state.inFlight = false;
      this.showCreateError(describeError(err));
      this.render();
    }
  }

  async importSession(): Promise<void> {
    if (this.state.inFlight) return;
    this.refs.createError.hidden = true;
    const client = this.makeClient(this.refs.baseUrl.value.trim());
    this.state.inFlight = true;
    this.render();
    try {
      const sessionId = await client.importSession(this.refs.importJson.value);
      this.state.inFlight = false;
      await this.enterSession(client, sessionId);
    } catch (err) {
      this.state.inFlight = false;
      this.showCreateError(describeError(err));
      this.render();
    }
  }

  private leaveSession(): void {
    this.state.screen = "create";
    this.state.client = null;
    this.state.sessionId = null;
    this.state.progress = null;
    this.state.labeler = null;
    this.state.estimate = null;
    this.state.error = null;
    this.state.exportText = "";
    this.render();
  }

  private async enterSession(client: LabelServiceClient, sessionId: string): Promise<void> {
    this.state.client = client;
    this.state.sessionId = sessionId;
    this.state.screen = "label";
    this.state.error = null;
    this.state.exportText = "";
    this.refs.connection.textContent = client.baseUrl;
    await this.refreshBatch();
    await this.refreshEstimate();
    this.render();
  }

  async submitBatch(): Promise<void> {
    const { client, sessionId, labeler } = this.state;
    if (this.state.inFlight || client === null || sessionId === null) return;
    if (labeler === null || !labeler.isComplete() || labeler.pending().length === 0) return;

    this.state.inFlight = true;
    this.render();
    try {
      const progress = await client.submitLabels(sessionId, labeler.pending());
      this.state.progress = progress;
      this.state.error = null;
      if (progress.state === "complete") {
        this.state.labeler = null;
      } else {
        await this.refreshBatch();
      }
      await this.refreshEstimate();
    } catch (err) {
      if (err instanceof ServiceError && err.code === "AlreadyLabeled") {
        // Another submission beat us to part of this batch: trust the server,
        // re-fetch so already-labeled items show as done, keep the code visible.
        this.setError(err, null);
        await this.refreshBatch();
        await this.refreshEstimate();
      } else {
        this.setError(err, () => void this.submitBatch());
      }
    } finally {
      this.state.inFlight = false;
      this.render();
    }
  }

  private async refreshBatch(): Promise<void> {
    const { client, sessionId } = this.state;
    if (client === null || sessionId === null) return;
    try {
      const batch = await client.fetchBatch(sessionId);
      this.state.labeler = new BatchLabeler(batch.items);
      this.state.progress = batch.progress;
    } catch (err) {
      if (err instanceof ServiceError && err.code === "SessionComplete") {
        this.state.labeler = null;
        if (this.state.progress !== null) this.state.progress.state = "complete";
      } else {
        this.setError(err, () => void this.refreshAndRender());
      }
    }
  }

  private async refreshEstimate(): Promise<void> {
    const { client, sessionId } = this.state;
    if (client === null || sessionId === null) return;
    try {
      this.state.estimate = await client.fetchEstimate(sessionId);
    } catch (err) {
      if (err instanceof ServiceError && err.code === "NoEstimateYet") {
        this.state.estimate = null;
      } else {
        this.setError(err, () => void this.refreshAndRender());
      }
    }
  }

  private async refreshAndRender(): Promise<void> {
    this.state.error = null;
    await this.refreshBatch();
    await this.refreshEstimate();
    this.render();
  }

  async exportSession(): Promise<void> {
    const { client, sessionId } = this.state;
    if (client === null || sessionId === null) return;
    try {
      this.state.exportText = await client.exportSession(sessionId);
      this.state.error = null;
    } catch (err) {
      this.setError(err, () => void this.exportSession());
    }
    this.render();
  }

  private retryLastError(): void {
    const retry = this.state.error?.retry;
    this.state.error = null;
    this.render();
    if (retry) retry();
  }

  private setError(err: unknown, retry: (() => void) | null): void {
    if (err instanceof ServiceError) {
      this.state.error = { code: err.code, message: err.message, retry };
    } else {
      this.state.error = { code: "NetworkError", message: describeError(err), retry };
    }
  }

  private showCreateError(message: string): void {
    this.refs.createError.textContent = message;
    this.refs.createError.hidden = false;
  }

  // -- rendering --------------------------------------------------------------

  private render(): void {
    const s = this.state;
    this.refs.screenCreate.hidden = s.screen !== "create";
    this.refs.screenLabel.hidden = s.screen !== "label";
    this.refs.startSession.disabled = s.inFlight;
    this.refs.importSession.disabled = s.inFlight;
    if (s.screen !== "label") return;

    this.refs.sessionId.textContent = s.sessionId ?? "";
    this.renderProgress();
    this.renderError();
    this.renderBatch();
    this.renderEstimate();
    this.refs.exportOutput.value = s.exportText;
  }

  private renderProgress(): void {
    const { progress, labeler, estimate } = this.state;
    if (progress !== null) {
      this.refs.progressLabels.textContent = `${progress.labels_used} / ${progress.budget} labels`;
      this.refs.progressIteration.textContent = `iteration ${progress.iteration}`;
      this.refs.progressState.textContent = progress.state;
    } else {
      // No progress payload exists (e.g. an imported, already-complete
      // session); the 409 on the batch endpoint told us the state.
      this.refs.progressLabels.textContent = "";
      this.refs.progressIteration.textContent = "";
      this.refs.progressState.textContent =
        labeler === null && estimate !== null ? "complete" : "";
    }
    this.refs.progressState.classList.toggle(
      "complete",
      this.refs.progressState.textContent === "complete",
    );
  }

  private renderError(): void {
    const { error } = this.state;
    this.refs.errorBanner.hidden = error === null;
    this.refs.errorCode.textContent = error?.code ?? "";
    this.refs.errorMessage.textContent = error?.message ?? "";
    this.refs.retry.hidden = error?.retry == null;
  }

  private renderBatch(): void {
    const { labeler, inFlight } = this.state;
    this.refs.itemCard.replaceChildren();
    this.refs.batchList.replaceChildren();

    const complete = labeler === null;
    this.refs.markPositive.disabled = complete || inFlight || labeler.current() === null;
    this.refs.markNegative.disabled = this.refs.markPositive.disabled;
    this.refs.undo.disabled = complete || inFlight || labeler.pending().length === 0;
    this.refs.submit.disabled =
      complete || inFlight || !labeler.isComplete() || labeler.pending().length === 0;

    if (complete) {
      this.refs.itemCard.append(
        el("p", { class: "done-note", "data-testid": "done-note" },
          "Labeling budget spent — the estimate below is final."),
      );
      return;
    }

    const current = labeler.current();
    if (current === null) {
      this.refs.itemCard.append(
        el("p", { class: "batch-ready" }, "Batch fully labeled — press enter to submit."),
      );
    } else {
      const card = el("div", { class: "item-fields" },
        el("div", {}, "item ", el("code", { "data-testid": "item-id" }, current.id)),
        el("div", {}, "score ", el("strong", { "data-testid": "item-score" }, String(current.score))),
        el("div", {}, "predicted ",
          el("strong", { "data-testid": "item-predicted" }, String(current.predicted))),
      );
      if (typeof current.asset_url === "string" && current.asset_url !== "") {
        card.append(
          el("img", {
            src: current.asset_url,
            alt: `asset for ${current.id}`,
            class: "item-asset",
            "data-testid": "item-asset",
          }),
        );
      }
      this.refs.itemCard.append(card);
    }

    for (const item of labeler.batch()) {
      const answer = labeler.answerFor(item.id);
      const isCurrent = current !== null && item.id === current.id;
      let status = "·";
      if (item.labeled) status = "✓";
      else if (answer !== null) status = String(answer);
      else if (isCurrent) status = "▸";
      const li = el("li", { "data-item-id": item.id },
        el("span", { class: "status" }, status),
        el("code", {}, item.id),
        el("span", { class: "score" }, String(item.score)),
      );
      li.classList.toggle("current", isCurrent);
      li.classList.toggle("pending", answer !== null);
      li.classList.toggle("done", item.labeled);
      this.refs.batchList.append(li);
    }
  }

  private renderEstimate(): void {
    const { estimate } = this.state;
    this.refs.estimateG.textContent = estimate === null ? "—" : String(estimate.g_combined);
    this.refs.estimateVar.textContent = estimate === null ? "—" : String(estimate.var_combined);
    this.refs.chartHost.replaceChildren(estimateChart(estimate?.per_iteration ?? []));
    this.refs.iterationList.replaceChildren(
      ...(estimate?.per_iteration ?? []).map((row) =>
        el("li", { "data-iteration": String(row.i) },
          `iteration ${row.i} · batch ${row.batch_size} · g ${String(row.g)} · var ${String(row.var)}`),
      ),
    );
  }
}

/** Accept either a bare item array or a {"items": [...]} wrapper. */
export function parsePoolText(text: string): PoolItem[] {
  let parsed: unknown;
  try {
    parsed = JSON.parse(text);
  } catch (err) {
    throw new Error(`pool is not valid JSON: ${String(err)}`);
  }
  const items = Array.isArray(parsed)
    ? parsed
    : typeof parsed === "object" && parsed !== null && Array.isArray((parsed as { items?: unknown }).items)
      ? (parsed as { items: unknown[] }).items
      : null;
  if (items === null) throw new Error('pool must be an array or an {"items": […]} object');
  if (items.length === 0) throw new Error("pool has no items");
  for (const item of items) {
    if (typeof item !== "object" || item === null) throw new Error("each pool item must be an object");
    const record = item as Record<string, unknown>;
    if (typeof record.id !== "string" && typeof record.id !== "number") {
      throw new Error('each pool item needs an "id"');
    }
    if (typeof record.score !== "number") throw new Error('each pool item needs a numeric "score"');
    if (record.predicted !== 0 && record.predicted !== 1) {
      throw new Error('each pool item needs "predicted" of 0 or 1');
    }
  }
  return items as PoolItem[];
}

function describeError(err: unknown): string {
  if (err instanceof ServiceError) return `${err.code}: ${err.message}`;
  if (err instanceof Error) return err.message;
  return String(err);
}

export function initApp(
  root: HTMLElement,
  makeClient: ClientFactory = (base) => new LabelServiceClient(base),
  options: { baseUrl?: string } = {},
): ConsoleApp {
  return new ConsoleApp(root, makeClient, options);
}
