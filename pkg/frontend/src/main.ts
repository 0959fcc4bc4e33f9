import { startApp } from './app';

const root = document.getElementById('app');
if (root) {
  const baseUrl = root.dataset.apiBase ?? 'http://127.0.0.1:8080';
  startApp(document, root, baseUrl).catch((err) => {
    root.textContent = `failed to start: ${err}`;
  });
}
