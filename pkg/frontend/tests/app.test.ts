import { afterEach, describe, expect, it, vi } from "vitest";
import { LabelServiceClient, type PoolItem } from "../src/api.js";
import { initApp, type ConsoleApp } from "../src/app.js";
import { FakeLabelService } from "./fake_service.js";

function poolItems(n: number, withAssets = false): PoolItem[] {
  return Array.from({ length: n }, (_, k) => {
    const item: PoolItem = {
      id: `item-${String(k).padStart(3, "0")}`,
      score: Number((1 - k / n).toFixed(6)),
      predicted: k < n / 3 ? 1 : 0,
    };
    if (withAssets) item.asset_url = `https://img.example/${k}.png`;
    return item;
  });
}

const liveApps: ConsoleApp[] = [];

afterEach(() => {
  for (const app of liveApps) app.dispose();
  liveApps.length = 0;
  document.body.innerHTML = "";
});

function mount(fake: FakeLabelService) {
  const root = document.createElement("div");
  document.body.append(root);
  const app = initApp(root, (base) => new LabelServiceClient(base, fake.fetch));
  liveApps.push(app);
  const q = <T extends HTMLElement>(testid: string): T => {
    const found = root.querySelector(`[data-testid="${testid}"]`);
    if (found === null) throw new Error(`missing ${testid}`);
    return found as T;
  };
  return { app, root, q };
}

async function startSession(
  fake: FakeLabelService,
  { n = 200, budget = 70, withAssets = false } = {},
) {
  const mounted = mount(fake);
  mounted.q<HTMLTextAreaElement>("pool-json").value = JSON.stringify(poolItems(n, withAssets));
  mounted.q<HTMLInputElement>("budget").value = String(budget);
  await mounted.app.startSession();
  return mounted;
}

function key(name: string, target: EventTarget = document) {
  target.dispatchEvent(new KeyboardEvent("keydown", { key: name, bubbles: true }));
}

function batchRows(q: (id: string) => HTMLElement): HTMLLIElement[] {
  return [...q("batch-list").querySelectorAll("li")] as HTMLLIElement[];
}

/** Label every remaining item in the current batch with alternating keys. */
function labelCurrentBatch(q: <T extends HTMLElement>(id: string) => T): void {
  const unials = batchRows(q as (id: string) => HTMLElement).filter(
    (li) => !li.classList.contains("done"),
  ).length;
  for (let k = 0; k < unials; k++) key(k % 2 === 0 ? "1" : "0");
}

function directClient(fake: FakeLabelService): LabelServiceClient {
  return new LabelServiceClient("http://fake.invalid", fake.fetch);
}

function labelPosts(fake: FakeLabelService): number {
  return fake.log.filter((e) => e.method === "POST" && e.path.endsWith("/labels")).length;
}

describe("console app", () => {
  it("creates a session and lands on the labeling screen with the first batch", async () => {
    const fake = new FakeLabelService();
    const { q } = await startSession(fake);

    expect(q("screen-create").hidden).toBe(true);
    expect(q("screen-label").hidden).toBe(false);
    expect(q("session-id").textContent).toBe("fake-1");
    expect(q("progress-labels").textContent).toBe("0 / 70 labels");
    expect(q("progress-state").textContent).toBe("awaiting_labels");
    expect(batchRows(q)).toHaveLength(10);

    // The fake serves items by descending score, so the card shows item-000.
    expect(q("item-id").textContent).toBe("item-000");
    expect(q("item-score").textContent).toBe("1");
    expect(q("item-predicted").textContent).toBe("1");
    expect(q<HTMLButtonElement>("submit").disabled).toBe(true);
  });

  it("rejects malformed pool JSON locally without any request", async () => {
    const fake = new FakeLabelService();
    const { app, q } = mount(fake);
    q<HTMLTextAreaElement>("pool-json").value = "{oops";
    await app.startSession();
    expect(q("create-error").hidden).toBe(false);
    expect(q("create-error").textContent).toContain("not valid JSON");
    expect(fake.log).toHaveLength(0);

    q<HTMLTextAreaElement>("pool-json").value = "[]";
    await app.startSession();
    expect(q("create-error").textContent).toContain("no items");
    expect(fake.log).toHaveLength(0);
  });

  it("labels and undoes with single keystrokes, entirely offline", async () => {
    const fake = new FakeLabelService();
    const { q } = await startSession(fake);
    const requestsBefore = fake.log.length;

    key("1");
    let rows = batchRows(q);
    expect(rows[0]!.classList.contains("pending")).toBe(true);
    expect(rows[0]!.querySelector(".status")!.textContent).toBe("1");
    expect(q("item-id").textContent).toBe("item-001");

    key("0");
    rows = batchRows(q);
    expect(rows[1]!.querySelector(".status")!.textContent).toBe("0");
    expect(q("item-id").textContent).toBe("item-002");

    key("u");
    rows = batchRows(q);
    expect(rows[1]!.classList.contains("pending")).toBe(false);
    expect(q("item-id").textContent).toBe("item-001");

    // Undo before submit issues no network call — nor does labeling itself.
    expect(fake.log.length).toBe(requestsBefore);
  });

  it("ignores labeling keys while typing into a field", async () => {
    const fake = new FakeLabelService();
    const { q } = await startSession(fake);
    key("1", q("export-output"));
    expect(batchRows(q)[0]!.classList.contains("pending")).toBe(false);
    expect(q("item-id").textContent).toBe("item-000");
  });

  it("submitting the first full batch gives the chart its first point", async () => {
    const fake = new FakeLabelService();
    const { q } = await startSession(fake);

    labelCurrentBatch(q);
    expect(q<HTMLButtonElement>("submit").disabled).toBe(false);
    key("Enter");
    await vi.waitFor(() => {
      expect(q("estimate-g").textContent).not.toBe("—");
    });

    expect(q("chart-host").querySelectorAll("circle.point")).toHaveLength(1);
    const sessionId = q("session-id").textContent!;
    const estimate = await directClient(fake).fetchEstimate(sessionId);
    expect(q("estimate-g").textContent).toBe(String(estimate.g_combined));
    expect(q("estimate-var").textContent).toBe(String(estimate.var_combined));
    expect(batchRows(q)).toHaveLength(20);
    expect(q("progress-labels").textContent).toBe("10 / 70 labels");
  });

  it("labels three full batches and echoes the server estimate exactly", async () => {
    const fake = new FakeLabelService();
    const { app, q } = await startSession(fake, { budget: 70 });

    for (const expectedSize of [10, 20, 40]) {
      expect(batchRows(q)).toHaveLength(expectedSize);
      labelCurrentBatch(q);
      await app.submitBatch();
    }

    expect(q("progress-state").textContent).toBe("complete");
    expect(q("progress-labels").textContent).toBe("70 / 70 labels");
    expect(q("done-note").textContent).toContain("budget spent");
    expect(q<HTMLButtonElement>("submit").disabled).toBe(true);

    const sessionId = q("session-id").textContent!;
    const estimate = await directClient(fake).fetchEstimate(sessionId);
    expect(q("estimate-g").textContent).toBe(String(estimate.g_combined));
    expect(q("estimate-var").textContent).toBe(String(estimate.var_combined));

    const circles = [...q("chart-host").querySelectorAll("circle.point")];
    expect(circles).toHaveLength(3);
    circles.forEach((circle, k) => {
      const row = estimate.per_iteration[k]!;
      expect(circle.getAttribute("data-g")).toBe(String(row.g));
      expect(circle.getAttribute("data-var")).toBe(String(row.var));
    });

    const iterationRows = [...q("iteration-list").querySelectorAll("li")];
    expect(iterationRows).toHaveLength(3);
    iterationRows.forEach((li, k) => {
      const row = estimate.per_iteration[k]!;
      expect(li.textContent).toContain(`g ${String(row.g)}`);
      expect(li.textContent).toContain(`var ${String(row.var)}`);
      expect(li.textContent).toContain(`batch ${row.batch_size}`);
    });
  });

  it("exports the session document byte-for-byte", async () => {
    const fake = new FakeLabelService();
    const { app, q } = await startSession(fake, { budget: 40 });
    labelCurrentBatch(q);
    await app.submitBatch();

    await app.exportSession();
    const shown = q<HTMLTextAreaElement>("export-output").value;
    const direct = await directClient(fake).exportSession(q("session-id").textContent!);
    expect(shown).toBe(direct);
    expect(shown.endsWith("\n")).toBe(true);
  });

  it("round-trips export through import on a fresh service and continues", async () => {
    const fakeA = new FakeLabelService();
    const a = await startSession(fakeA, { budget: 40 });
    labelCurrentBatch(a.q);
    await a.app.submitBatch();
    await a.app.exportSession();
    const exported = a.q<HTMLTextAreaElement>("export-output").value;

    const fakeB = new FakeLabelService();
    const b = mount(fakeB);
    b.q<HTMLTextAreaElement>("import-json").value = exported;
    await b.app.importSession();

    expect(b.q("screen-label").hidden).toBe(false);
    expect(b.q("session-id").textContent).toBe(a.q("session-id").textContent);
    expect(b.q("progress-labels").textContent).toBe("10 / 40 labels");

    // Re-export before touching anything: byte-identical to the original.
    await b.app.exportSession();
    expect(b.q<HTMLTextAreaElement>("export-output").value).toBe(exported);

    // Continue labeling on the imported copy to completion.
    for (const expectedSize of [20, 10]) {
      expect(batchRows(b.q)).toHaveLength(expectedSize);
      labelCurrentBatch(b.q);
      await b.app.submitBatch();
    }
    expect(b.q("progress-state").textContent).toBe("complete");
    const estimate = await directClient(fakeB).fetchEstimate(b.q("session-id").textContent!);
    expect(b.q("estimate-g").textContent).toBe(String(estimate.g_combined));
    expect(b.q("estimate-var").textContent).toBe(String(estimate.var_combined));
  });

  it("surfaces AlreadyLabeled verbatim, marks the item done, and refetches", async () => {
    const fake = new FakeLabelService();
    const { app, q } = await startSession(fake, { budget: 40 });
    labelCurrentBatch(q);

    // Another client (a second tab) labels one batch item first.
    const sessionId = q("session-id").textContent!;
    const conflicted = batchRows(q)[0]!.dataset.itemId!;
    await directClient(fake).submitLabels(sessionId, [{ id: conflicted, label: 1 }]);

    await app.submitBatch();
    expect(q("error-banner").hidden).toBe(false);
    expect(q("error-code").textContent).toBe("AlreadyLabeled");

    const row = batchRows(q).find((li) => li.dataset.itemId === conflicted)!;
    expect(row.classList.contains("done")).toBe(true);
    expect(row.querySelector(".status")!.textContent).toBe("✓");
    const tail = fake.log.slice(-3).map((e) => `${e.method} ${e.path}`);
    expect(tail.some((line) => line.endsWith("/batch"))).toBe(true);

    // The remaining nine items relabel and submit cleanly.
    labelCurrentBatch(q);
    await app.submitBatch();
    expect(q("error-banner").hidden).toBe(true);
    expect(q("progress-labels").textContent).toBe("10 / 40 labels");
  });

  it("never issues concurrent submits", async () => {
    const fake = new FakeLabelService();
    const { app, q } = await startSession(fake, { budget: 40 });
    labelCurrentBatch(q);

    let release!: () => void;
    fake.gate = new Promise<void>((resolve) => {
      release = resolve;
    });
    const inFlight = app.submitBatch();
    await vi.waitFor(() => {
      expect(labelPosts(fake)).toBe(1);
    });
    expect(q<HTMLButtonElement>("submit").disabled).toBe(true);

    key("Enter");
    void app.submitBatch();
    expect(labelPosts(fake)).toBe(1);

    fake.gate = null;
    release();
    await inFlight;
    expect(labelPosts(fake)).toBe(1);
    expect(batchRows(q)).toHaveLength(20);
  });

  it("shows server error codes verbatim and retries the failed submit", async () => {
    const fake = new FakeLabelService();
    const { app, q } = await startSession(fake, { budget: 40 });
    labelCurrentBatch(q);

    fake.failNext = { status: 500, error: "StorageError", message: "disk full" };
    await app.submitBatch();
    expect(q("error-banner").hidden).toBe(false);
    expect(q("error-code").textContent).toBe("StorageError");
    expect(q("error-message").textContent).toBe("disk full");
    expect(q<HTMLButtonElement>("retry").hidden).toBe(false);

    q<HTMLButtonElement>("retry").click();
    await vi.waitFor(() => {
      expect(q("progress-labels").textContent).toBe("10 / 40 labels");
    });
    expect(q("error-banner").hidden).toBe(true);
    expect(q("estimate-g").textContent).not.toBe("—");
  });

  it("imports an already-complete session straight to its final estimate", async () => {
    const fakeA = new FakeLabelService();
    const a = await startSession(fakeA, { n: 40, budget: 12 });
    labelCurrentBatch(a.q);
    await a.app.submitBatch();
    labelCurrentBatch(a.q);
    await a.app.submitBatch();
    expect(a.q("progress-state").textContent).toBe("complete");
    await a.app.exportSession();
    const exported = a.q<HTMLTextAreaElement>("export-output").value;

    const fakeB = new FakeLabelService();
    const b = mount(fakeB);
    b.q<HTMLTextAreaElement>("import-json").value = exported;
    await b.app.importSession();

    expect(b.q("progress-state").textContent).toBe("complete");
    expect(b.q("done-note").textContent).toContain("budget spent");
    expect(b.q<HTMLButtonElement>("submit").disabled).toBe(true);
    const estimate = await directClient(fakeB).fetchEstimate(b.q("session-id").textContent!);
    expect(b.q("estimate-g").textContent).toBe(String(estimate.g_combined));
    expect(b.q("chart-host").querySelectorAll("circle.point")).toHaveLength(2);
  });

  it("renders an image when the item carries an asset URL", async () => {
    const fake = new FakeLabelService();
    const { q } = await startSession(fake, { withAssets: true });
    const img = q<HTMLImageElement>("item-asset");
    expect(img.getAttribute("src")).toBe("https://img.example/0.png");
  });

  it("leave returns to the create screen and drops session state", async () => {
    const fake = new FakeLabelService();
    const { q } = await startSession(fake);
    q<HTMLButtonElement>("leave-session").click();
    expect(q("screen-create").hidden).toBe(false);
    expect(q("screen-label").hidden).toBe(true);
    key("1");
    expect(fake.log.filter((e) => e.method === "POST")).toHaveLength(1);
  });
});
