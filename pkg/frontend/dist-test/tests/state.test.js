import assert from "node:assert/strict";
import { test } from "node:test";
import { EditorCore } from "../src/state.js";
import { drainMicrotasks, FakeClock, gridTemplate, ScriptedTransport } from "./helpers.js";
async function makeEditor(options = {}) {
    const transport = new ScriptedTransport();
    const clock = new FakeClock();
    const core = new EditorCore(transport, clock, options);
    await core.loadTemplate("frontal");
    await clock.advance(300); // settle the load-triggered synthesis
    transport.requests.length = 0;
    core.requestsIssued = 0;
    return { core, transport, clock };
}
test("load template renders 68 points and fires one synthesis", async () => {
    const transport = new ScriptedTransport();
    const clock = new FakeClock();
    const core = new EditorCore(transport, clock);
    await core.loadTemplate("frontal");
    assert.equal(core.points.length, 68);
    assert.equal(core.templateName, "frontal");
    assert.equal(transport.requests.length, 0); // debounced, not yet fired
    await clock.advance(250);
    assert.equal(transport.requests.length, 1);
    assert.equal(core.lastResponse?.image, "png-1");
});
test("a burst of k drags within the debounce window issues exactly one request", async () => {
    const { core, transport, clock } = await makeEditor();
    for (let k = 0; k < 12; k++) {
        core.dragPoint(30, 0.3 + k * 0.01, 0.4);
        await clock.advance(10); // well inside the 250 ms window
    }
    assert.equal(transport.requests.length, 0);
    await clock.advance(250);
    assert.equal(transport.requests.length, 1);
    const sent = transport.requests[0].request.landmarks[30];
    assert.deepEqual(sent, core.points[30]); // newest coordinates win
});
test("drags separated by more than the window issue separate requests", async () => {
    const { core, transport, clock } = await makeEditor();
    core.dragPoint(10, 0.9, 0.9);
    await clock.advance(260);
    core.dragPoint(10, 0.8, 0.8);
    await clock.advance(260);
    assert.equal(transport.requests.length, 2);
});
test("drag with no movement is free: no undo entry, no network call", async () => {
    const { core, transport, clock } = await makeEditor();
    const [x, y] = core.points[5];
    core.dragPoint(5, x, y);
    assert.equal(core.undoDepth, 0);
    await clock.advance(500);
    assert.equal(transport.requests.length, 0);
});
test("undo(drag(s)) restores s exactly", async () => {
    const { core, clock } = await makeEditor();
    const before = core.points.map((p) => [p[0], p[1]]);
    core.dragPoint(42, 0.123456789, 0.987654321);
    assert.notDeepEqual(core.points, before);
    assert.equal(core.undo(), true);
    assert.deepEqual(core.points, before);
    assert.equal(core.undo(), false); // nothing left to undo
    await clock.advance(300);
});
test("undo stack depth is capped at 100", async () => {
    const { core } = await makeEditor();
    for (let i = 0; i < 130; i++) {
        core.dragPoint(7, (i % 90) / 100 + 0.01, 0.5);
    }
    assert.equal(core.undoDepth, 100);
});
test("gesture pushes a single undo entry for many moves", async () => {
    const { core, clock } = await makeEditor();
    const before = core.points.map((p) => [p[0], p[1]]);
    core.beginGesture(20);
    for (let i = 0; i < 15; i++) {
        core.moveGesture(0.2 + i * 0.02, 0.6);
    }
    core.endGesture();
    assert.equal(core.undoDepth, 1);
    core.undo();
    assert.deepEqual(core.points, before);
    await clock.advance(300);
});
test("coordinates are clamped so payloads always satisfy the server rules", async () => {
    const { core, transport, clock } = await makeEditor();
    core.dragPoint(0, -0.4, 1.7);
    assert.deepEqual(core.points[0], [0, 1]);
    await clock.advance(250);
    const sent = transport.requests[0].request.landmarks;
    assert.ok(sent.every(([x, y]) => x >= 0 && x <= 1 && y >= 0 && y <= 1));
    assert.equal(sent.length, 68);
});
test("out-of-range point index is rejected", async () => {
    const { core } = await makeEditor();
    assert.throws(() => core.dragPoint(68, 0.5, 0.5), /out of range/);
    assert.throws(() => core.dragPoint(-1, 0.5, 0.5), /out of range/);
});
test("at most one request in flight; completion re-issues with latest points", async () => {
    const transport = new ScriptedTransport();
    transport.autoRespond = false;
    const clock = new FakeClock();
    const core = new EditorCore(transport, clock);
    await core.loadTemplate("frontal");
    await clock.advance(250);
    assert.equal(transport.requests.length, 1); // hanging
    core.dragPoint(1, 0.4, 0.4);
    await clock.advance(250);
    assert.equal(transport.requests.length, 1); // queued behind the in-flight one
    core.dragPoint(1, 0.45, 0.45);
    await clock.advance(250);
    transport.requests[0].resolve(transport.makeResponse());
    await drainMicrotasks();
    assert.equal(transport.requests.length, 2);
    assert.deepEqual(transport.requests[1].request.landmarks[1], core.points[1]);
    transport.requests[1].resolve(transport.makeResponse());
    await drainMicrotasks();
    assert.equal(core.lastResponse?.image, "png-2");
});
test("newest response wins when flushes overlap", async () => {
    const transport = new ScriptedTransport();
    transport.autoRespond = false;
    const clock = new FakeClock();
    const core = new EditorCore(transport, clock);
    await core.loadTemplate("frontal");
    const first = core.flush(); // request 1 in flight
    core.dragPoint(2, 0.9, 0.1);
    const second = core.flush(); // queued behind it
    transport.requests[0].resolve(transport.makeResponse()); // png-1 applies
    await first;
    await drainMicrotasks();
    transport.requests[1].resolve(transport.makeResponse()); // png-2 applies
    await second;
    await drainMicrotasks();
    assert.equal(core.lastResponse?.image, "png-2");
    assert.equal(core.responsesApplied, 2);
});
test("transport failure is surfaced and does not wedge the editor", async () => {
    const transport = new ScriptedTransport();
    transport.autoRespond = false;
    const clock = new FakeClock();
    const core = new EditorCore(transport, clock);
    await core.loadTemplate("frontal");
    const pending = core.flush();
    transport.requests[0].reject(new Error("boom"));
    await pending;
    await drainMicrotasks();
    assert.equal(core.lastError, "boom");
    core.dragPoint(3, 0.3, 0.3);
    await clock.advance(250);
    transport.requests[1].resolve(transport.makeResponse());
    await drainMicrotasks();
    assert.equal(core.lastError, null);
    assert.ok(core.lastResponse);
});
test("export pair carries the current landmarks and last image", async () => {
    const { core, clock } = await makeEditor();
    core.dragPoint(4, 0.25, 0.75);
    await clock.advance(250);
    const pair = core.exportPair();
    const parsed = JSON.parse(pair.landmarksJson);
    assert.equal(parsed.schema, "ibug68");
    assert.equal(parsed.points.length, 68);
    assert.deepEqual(parsed.points[4], [0.25, 0.75]);
    assert.equal(pair.imageBase64, "png-2"); // png-1 was the template-load render
});
test("unknown template name rejects", async () => {
    const transport = new ScriptedTransport([gridTemplate("frontal")]);
    const core = new EditorCore(transport, new FakeClock());
    await assert.rejects(core.loadTemplate("nope"), /unknown template/);
});
