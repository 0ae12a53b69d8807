import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "node",
    include: ["test/**/*.test.ts", "e2e/**/*.test.ts"],
    // the e2e file boots a real service process and waits on it
    testTimeout: 120_000,
    hookTimeout: 120_000,
  },
});
