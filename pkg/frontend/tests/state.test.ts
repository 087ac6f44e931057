import { describe, expect, it } from "vitest";

import {
  decodeState,
  defaultState,
  encodeState,
  withExcluded,
  withoutExcluded,
  EXCLUDED_CAP,
  type ExplorationState,
} from "../src/state.js";

describe("encodeState", () => {
  it("serializes the default state to an empty query string", () => {
    expect(encodeState(defaultState())).toBe("");
  });

  it("omits fields still at their default", () => {
    const state = { ...defaultState(), focus: "kmalloc" };
    expect(encodeState(state)).toBe("focus=kmalloc");
  });

  it("keeps excluded entries in insertion order", () => {
    const state = { ...defaultState(), excluded: ["b", "a", "c"] };
    expect(encodeState(state)).toContain("excluded=b%2Ca%2Cc");
  });
});

describe("decodeState", () => {
  it("restores defaults from an empty string", () => {
    expect(decodeState("")).toEqual(defaultState());
  });

  it("accepts a leading question mark", () => {
    expect(decodeState("?focus=main").focus).toBe("main");
  });

  it("drops duplicate and empty excluded entries", () => {
    expect(decodeState("excluded=b,b,,c,").excluded).toEqual(["b", "c"]);
  });

  it("caps the excluded list", () => {
    const names = Array.from({ length: EXCLUDED_CAP + 50 }, (_, i) => `f${i}`);
    const state = decodeState(`excluded=${names.join(",")}`);
    expect(state.excluded).toHaveLength(EXCLUDED_CAP);
    expect(state.excluded[0]).toBe("f0");
    expect(state.excluded[EXCLUDED_CAP - 1]).toBe(`f${EXCLUDED_CAP - 1}`);
  });

  it("falls back to defaults on out-of-range values", () => {
    const state = decodeState("pane=garden&dir=up&mode=through");
    expect(state.pane).toBe("explore");
    expect(state.direction).toBe("callers");
    expect(state.cutoffMode).toBe("filter");
  });

  it("ignores unknown parameters", () => {
    expect(decodeState("bogus=1&focus=a").focus).toBe("a");
  });

  it("treats only transitive=0 as off", () => {
    expect(decodeState("transitive=0").transitive).toBe(false);
    expect(decodeState("transitive=1").transitive).toBe(true);
    expect(decodeState("").transitive).toBe(true);
  });
});

describe("round trip", () => {
  it("survives encode then decode with every field off-default", () => {
    const state: ExplorationState = {
      pane: "cutoff",
      focus: "sched_init",
      direction: "callees",
      transitive: false,
      excluded: ["kmalloc", "printk"],
      cutoffMode: "barrier",
      file: "kernel/sched",
      server: "http://10.0.0.7:9000",
    };
    expect(decodeState(encodeState(state))).toEqual(state);
  });

  it("survives names that need percent-encoding", () => {
    const state = { ...defaultState(), focus: "op&=?#x" };
    expect(decodeState(encodeState(state)).focus).toBe("op&=?#x");
  });
});

describe("excluded set edits", () => {
  it("adds without duplicating", () => {
    const base = { ...defaultState(), excluded: ["a"] };
    expect(withExcluded(base, "b").excluded).toEqual(["a", "b"]);
    expect(withExcluded(base, "a")).toBe(base);
    expect(withExcluded(base, "")).toBe(base);
  });

  it("refuses to grow past the cap", () => {
    const full = {
      ...defaultState(),
      excluded: Array.from({ length: EXCLUDED_CAP }, (_, i) => `f${i}`),
    };
    expect(withExcluded(full, "overflow")).toBe(full);
  });

  it("removes only what is present", () => {
    const base = { ...defaultState(), excluded: ["a", "b"] };
    expect(withoutExcluded(base, "a").excluded).toEqual(["b"]);
    expect(withoutExcluded(base, "zz")).toBe(base);
  });
});
