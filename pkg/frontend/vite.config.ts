import { defineConfig } from "vite";

// In dev, forward API calls to a locally running tile service.
const API = process.env.GRASP_API ?? "http://127.0.0.1:8080";

export default defineConfig({
  base: "./",
  server: {
    proxy: {
      "/config": API,
      "/catalog": API,
      "/layers": API,
      "/tiles": API,
      "/analysis": API,
    },
  },
  test: {
    environment: "node",
  },
});
