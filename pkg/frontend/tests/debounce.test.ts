import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { debounce, LatestWins } from "../src/debounce.js";

describe("debounce", () => {
  beforeEach(() => vi.useFakeTimers());
  afterEach(() => vi.useRealTimers());

  it("collapses a burst into one trailing call", () => {
    const calls: number[] = [];
    const fn = debounce((x: number) => calls.push(x), 100);
    fn(1);
    fn(2);
    fn(3);
    vi.advanceTimersByTime(99);
    expect(calls).toEqual([]);
    vi.advanceTimersByTime(2);
    expect(calls).toEqual([3]);
  });

  it("fires again after quiet periods", () => {
    const calls: number[] = [];
    const fn = debounce((x: number) => calls.push(x), 50);
    fn(1);
    vi.advanceTimersByTime(60);
    fn(2);
    vi.advanceTimersByTime(60);
    expect(calls).toEqual([1, 2]);
  });
});

describe("LatestWins", () => {
  it("supersedes queued jobs and drops stale results", async () => {
    const runner = new LatestWins<number>();
    const done: number[] = [];
    let release: (() => void) | null = null;
    const slow = () =>
      new Promise<number>((resolve) => {
        release = () => resolve(1);
      });
    const p1 = runner.submit(slow, (v) => done.push(v));
    const p2 = runner.submit(async () => 2, (v) => done.push(v));
    const p3 = runner.submit(async () => 3, (v) => done.push(v));
    release!();
    await Promise.all([p1, p2, p3]);
    // job 1's result is stale (superseded while running); job 2 was
    // replaced before starting; only job 3 lands
    expect(done).toEqual([3]);
  });

  it("reports errors only for the latest job", async () => {
    const runner = new LatestWins<number>();
    const errors: string[] = [];
    const done: number[] = [];
    await runner.submit(
      async () => {
        throw new Error("boom");
      },
      (v) => done.push(v),
      (e) => errors.push(String(e)),
    );
    expect(done).toEqual([]);
    expect(errors).toHaveLength(1);
  });
});
