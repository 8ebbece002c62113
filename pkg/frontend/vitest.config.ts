import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "happy-dom",
    include: ["tests/**/*.test.ts"],
    // the integration suite spawns the real service once per file
    fileParallelism: false,
    testTimeout: 60000,
    hookTimeout: 60000,
  },
});
