import { describe, expect, it } from "vitest";

import { PollingFeed } from "../src/polling.js";

describe("PollingFeed", () => {
  it("applies fresh data and clears staleness", async () => {
    const feed = new PollingFeed(async () => [1, 2, 3]);
    expect(await feed.pollOnce()).toBe(true);
    expect(feed.state.data).toEqual([1, 2, 3]);
    expect(feed.state.stale).toBe(false);
    expect(feed.state.lastUpdated).not.toBeNull();
  });

  it("keeps old data and turns stale on failure, without throwing", async () => {
    let fail = false;
    const feed = new PollingFeed(async () => {
      if (fail) throw new Error("connection refused");
      return "fresh";
    });
    await feed.pollOnce();
    fail = true;
    expect(await feed.pollOnce()).toBe(false);
    expect(feed.state.data).toBe("fresh"); // last good data retained
    expect(feed.state.stale).toBe(true);
    expect(feed.state.lastError).toContain("connection refused");
    fail = false;
    await feed.pollOnce();
    expect(feed.state.stale).toBe(false);
  });

  it("drops out-of-order responses: last response wins", () => {
    const changes: string[] = [];
    const feed = new PollingFeed<string>(
      async () => "unused",
      (state) => changes.push(state.data ?? ""),
    );
    const older = feed.begin();
    const newer = feed.begin();
    expect(feed.commit(newer, "second-request")).toBe(true);
    expect(feed.commit(older, "first-request")).toBe(false); // arrived late
    expect(feed.state.data).toBe("second-request");
    expect(changes).toEqual(["second-request"]);
  });
});
