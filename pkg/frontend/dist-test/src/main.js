import { ApiTransport } from "./api.js";
import { downloadPair, EditorView } from "./editor.js";
import { EditorCore, TimeoutScheduler } from "./state.js";
function el(id) {
    const node = document.getElementById(id);
    if (!node)
        throw new Error(`missing element #${id}`);
    return node;
}
async function boot() {
    const params = new URLSearchParams(window.location.search);
    const base = params.get("api") ?? window.location.origin;
    const transport = new ApiTransport(base);
    const core = new EditorCore(transport, new TimeoutScheduler());
    const view = new EditorView(core, el("landmark-canvas"), el("face-img"), el("heatmap-img"), el("gender-fill"), el("gender-label"), el("status-line"));
    const select = el("template-select");
    const templates = await core.listTemplates();
    for (const t of templates) {
        const option = document.createElement("option");
        option.value = t.name;
        option.textContent = t.name;
        select.appendChild(option);
    }
    select.addEventListener("change", () => void core.loadTemplate(select.value));
    el("undo-btn").addEventListener("click", () => core.undo());
    document.addEventListener("keydown", (event) => {
        if ((event.ctrlKey || event.metaKey) && event.key === "z") {
            event.preventDefault();
            core.undo();
        }
    });
    el("export-btn").addEventListener("click", () => downloadPair(core));
    const heatToggle = el("heatmap-toggle");
    heatToggle.addEventListener("change", () => {
        core.returnHeatmap = heatToggle.checked;
        void core.requestSynthesis();
    });
    await core.loadTemplate(templates[0]?.name ?? "frontal");
    await core.flush();
    view.render();
}
void boot().catch((err) => {
    const status = document.getElementById("status-line");
    if (status)
        status.textContent = `failed to start: ${err}`;
});
