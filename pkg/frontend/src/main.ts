import { ApiClient } from './api.js';
import { Dashboard } from './app.js';

// Service base URL: ?api=… beats a global, beats same-host default.
function apiBase(): string {
  const fromQuery = new URLSearchParams(window.location.search).get('api');
  if (fromQuery) return fromQuery.replace(/\/$/, '');
  const injected = (window as { TLFLOW_API?: string }).TLFLOW_API;
  if (injected) return injected.replace(/\/$/, '');
  return `${window.location.protocol}//${window.location.hostname}:8000`;
}

const root = document.getElementById('app');
const status = document.getElementById('status');
if (!root || !status) throw new Error('index.html is missing #app or #status');

new Dashboard(new ApiClient(apiBase()), root, status).start();
