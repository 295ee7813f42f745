import { initApp } from "./app.js";

const root = document.getElementById("app");
if (root === null) throw new Error("missing #app mount point");

const params = new URLSearchParams(window.location.search);
const baseUrl =
  params.get("service") ?? `${window.location.protocol}//${window.location.hostname}:8000`;

initApp(root, undefined, { baseUrl });
