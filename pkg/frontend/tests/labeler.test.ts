import { describe, expect, it } from "vitest";
import type { BatchItem } from "../src/api.js";
import { BatchLabeler } from "../src/labeler.js";

function items(n: number, labeled: number[] = []): BatchItem[] {
  return Array.from({ length: n }, (_, k) => ({
    id: `item-${k}`,
    score: 1 - k / n,
    predicted: k < n / 2 ? 1 : 0,
    labeled: labeled.includes(k),
  }));
}

/** Small deterministic PRNG so the random-walk test is reproducible. */
function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

describe("BatchLabeler", () => {
  it("walks the unlabeled items in order", () => {
    const labeler = new BatchLabeler(items(3));
    expect(labeler.current()?.id).toBe("item-0");
    expect(labeler.label(1)).toBe(true);
    expect(labeler.current()?.id).toBe("item-1");
    expect(labeler.label(0)).toBe(true);
    expect(labeler.current()?.id).toBe("item-2");
  });

  it("skips items the server already marked labeled", () => {
    const labeler = new BatchLabeler(items(4, [0, 2]));
    expect(labeler.current()?.id).toBe("item-1");
    labeler.label(1);
    expect(labeler.current()?.id).toBe("item-3");
    labeler.label(0);
    expect(labeler.isComplete()).toBe(true);
    expect(labeler.pending()).toEqual([
      { id: "item-1", label: 1 },
      { id: "item-3", label: 0 },
    ]);
  });

  it("undo takes back the last answer and restores the cursor", () => {
    const labeler = new BatchLabeler(items(3));
    labeler.label(1);
    labeler.label(0);
    expect(labeler.undo()).toBe(true);
    expect(labeler.current()?.id).toBe("item-1");
    expect(labeler.pending()).toEqual([{ id: "item-0", label: 1 }]);
  });

  it("undo with nothing pending reports false", () => {
    const labeler = new BatchLabeler(items(2));
    expect(labeler.undo()).toBe(false);
    labeler.label(1);
    labeler.undo();
    expect(labeler.undo()).toBe(false);
  });

  it("labeling past the end is a no-op", () => {
    const labeler = new BatchLabeler(items(1));
    expect(labeler.label(1)).toBe(true);
    expect(labeler.label(0)).toBe(false);
    expect(labeler.pending()).toHaveLength(1);
    expect(labeler.current()).toBeNull();
  });

  it("an all-labeled batch is complete with nothing pending", () => {
    const labeler = new BatchLabeler(items(2, [0, 1]));
    expect(labeler.isComplete()).toBe(true);
    expect(labeler.current()).toBeNull();
    expect(labeler.remaining()).toBe(0);
    expect(labeler.pending()).toEqual([]);
  });

  it("reports the answer recorded per item id", () => {
    const labeler = new BatchLabeler(items(3));
    labeler.label(0);
    expect(labeler.answerFor("item-0")).toBe(0);
    expect(labeler.answerFor("item-1")).toBeNull();
    expect(labeler.answerFor("nope")).toBeNull();
  });

  it("counts remaining keystrokes, not remaining items", () => {
    const labeler = new BatchLabeler(items(5, [4]));
    expect(labeler.remaining()).toBe(4);
    labeler.label(1);
    labeler.label(1);
    expect(labeler.remaining()).toBe(2);
    labeler.undo();
    expect(labeler.remaining()).toBe(3);
  });

  it("random label/undo walks agree with a list-model reference", () => {
    for (let seed = 1; seed <= 20; seed++) {
      const rand = mulberry32(seed);
      const n = 1 + Math.floor(rand() * 12);
      const prelabeled = Array.from({ length: n }, (_, k) => k).filter(() => rand() < 0.25);
      const batch = items(n, prelabeled);
      const queueIds = batch.filter((b) => !b.labeled).map((b) => b.id);

      const labeler = new BatchLabeler(batch);
      const model: Array<{ id: string; label: 0 | 1 }> = [];
      for (let step = 0; step < 60; step++) {
        if (rand() < 0.35) {
          const undone = labeler.undo();
          expect(undone).toBe(model.length > 0);
          if (undone) model.pop();
        } else {
          const value: 0 | 1 = rand() < 0.5 ? 0 : 1;
          const labeled = labeler.label(value);
          expect(labeled).toBe(model.length < queueIds.length);
          if (labeled) model.push({ id: queueIds[model.length]!, label: value });
        }
        expect(labeler.pending()).toEqual(model);
        expect(labeler.remaining()).toBe(queueIds.length - model.length);
        expect(labeler.isComplete()).toBe(model.length === queueIds.length);
        const expectedCurrent = queueIds[model.length] ?? null;
        expect(labeler.current()?.id ?? null).toBe(expectedCurrent);
      }
    }
  });
});
