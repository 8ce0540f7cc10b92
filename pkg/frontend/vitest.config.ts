import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["tests/**/*.test.ts"],
    testTimeout: 180_000,
    hookTimeout: 180_000,
    // the e2e suite boots one shared service; keep files sequential
    fileParallelism: false,
  },
});
