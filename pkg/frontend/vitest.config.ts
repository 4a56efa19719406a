import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["tests/**/*.test.ts"],
    // e2e spawns the real advisory service; first solve in a fresh
    // process can take a while even with a warm compile cache.
    testTimeout: 120_000,
    hookTimeout: 240_000,
  },
});
