import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["test/**/*.test.ts"],
    testTimeout: 60_000,
    hookTimeout: 60_000,
    // The walkthrough suites each spawn their own server process; run
    // files serially so two servers never race for the store directory.
    fileParallelism: false,
  },
});
