import type { BatchItem, LabelEntry } from "./api.js";

/**
 * Local labeling state for one batch: a cursor over the items that still need
 * a label, an append-only list of pending answers, and undo.
 *
 * Nothing here touches the network — undo before submit is purely local, and
 * the pending list is only read out when the whole batch is handed to the
 * service in a single request.
 */
export class BatchLabeler {
  private readonly items: BatchItem[];
  private readonly queue: BatchItem[];
  private readonly answers: LabelEntry[] = [];

  constructor(items: BatchItem[]) {
    this.items = items;
    this.queue = items.filter((item) => !item.labeled);
  }

  /** All items in the batch, in server order. */
  batch(): readonly BatchItem[] {
    return this.items;
  }

  /** The item the next keystroke will label, or null when none remain. */
  current(): BatchItem | null {
    return this.queue[this.answers.length] ?? null;
  }

  /** Record a label for the current item and advance. False when done. */
  label(value: 0 | 1): boolean {
    const item = this.current();
    if (item === null) return false;
    this.answers.push({ id: item.id, label: value });
    return true;
  }

  /** Take back the most recent answer. False when there is nothing to undo. */
  undo(): boolean {
    return this.answers.pop() !== undefined;
  }

  /** Pending answers in the order they were given. */
  pending(): LabelEntry[] {
    return this.answers.slice();
  }

  /** The answer recorded for an item id, or null if none yet. */
  answerFor(id: string): 0 | 1 | null {
    for (const entry of this.answers) {
      if (entry.id === id) return entry.label;
    }
    return null;
  }

  /** Items still waiting for a keystroke. */
  remaining(): number {
    return this.queue.length - this.answers.length;
  }

  /** True once every unlabeled item in the batch has a pending answer. */
  isComplete(): boolean {
    return this.answers.length === this.queue.length;
  }
}
