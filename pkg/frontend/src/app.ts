/** DOM wiring for the curation app.
 *
 * Everything stateful lives in the service; this layer renders service
 * responses and turns clicks and keys into API calls.  Views re-render
 * wholesale from current state, which keeps the update logic obvious at
 * the cost of some churn that does not matter at this scale.
 */

import {
  ApiClient,
  type AnnotationOut,
  type ExportPayload,
  type PairDetail,
  type PairSummary,
  type StatusFilter,
} from "./api.js";
import {
  formatGap,
  formatSim,
  summarizeExport,
  summaryLine,
} from "./format.js";
import { isTypingTarget, keyAction } from "./keyboard.js";
import { PATTERNS, PATTERN_TITLES } from "./patterns.js";
import {
  applyAck,
  describeError,
  initialBrowse,
  loadPage,
  selectNext,
  selectPrev,
  withSelection,
  SaveTracker,
  type BrowseState,
  type Move,
} from "./state.js";
import {
  emptyForm,
  isValid,
  toRequestBody,
  validateForm,
  type AnnotationForm,
  type FormErrors,
  type Status,
} from "./validate.js";
import { panBy, resetZoom, zoomBy, zoomTransform, type Zoom } from "./zoom.js";

type Attrs = Record<string, string | boolean | ((event: Event) => void)>;

function h(
  tag: string,
  attrs: Attrs = {},
  ...children: (Node | string | null)[]
): HTMLElement {
  const el = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    if (typeof value === "function") {
      el.addEventListener(key.replace(/^on/, ""), value);
    } else if (typeof value === "boolean") {
      if (value) {
        el.setAttribute(key, "");
      }
    } else {
      el.setAttribute(key, value);
    }
  }
  for (const child of children) {
    if (child !== null) {
      el.append(child);
    }
  }
  return el;
}

function pairImage(url: string, alt: string, className: string): HTMLElement {
  const img = h("img", { src: url, alt, class: className }) as HTMLImageElement;
  img.addEventListener("error", () => {
    img.replaceWith(
      h("div", { class: `${className} placeholder` }, "image missing"),
    );
  });
  return img;
}

function statusBadge(status: string | null): HTMLElement {
  const label = status ?? "unreviewed";
  return h("span", { class: `badge badge-${label}` }, label);
}

export class App {
  private readonly client: ApiClient;
  private readonly root: HTMLElement;
  private readonly tracker = new SaveTracker();

  private browse: BrowseState = initialBrowse();
  private view: "list" | "detail" = "list";
  private detail: PairDetail | null = null;
  private form: AnnotationForm | null = null;
  private formErrors: FormErrors | null = null;
  private serverError: string | null = null;
  private savedSeq: number | null = null;
  private dirty = false;
  private zoom: Zoom = resetZoom();
  private banner: string | null = null;
  private exportOpen = false;
  private exportPayload: ExportPayload | null = null;
  private acceptedTotal: number | null = null;
  private lastLoad: () => Promise<void> = () => this.loadList();

  constructor(root: HTMLElement, client: ApiClient) {
    this.root = root;
    this.client = client;
    document.addEventListener("keydown", (event) => this.onKey(event));
  }

  async start(): Promise<void> {
    await this.loadList();
  }

  // ----- data loading -------------------------------------------------

  private async guard(action: () => Promise<void>): Promise<void> {
    try {
      this.banner = null;
      await action();
    } catch (err) {
      const placement = describeError(err);
      if (placement.kind === "banner") {
        this.banner = placement.message;
      } else {
        this.serverError = placement.message;
      }
    }
    this.render();
  }

  private loadList(page?: number, selectLast = false): Promise<void> {
    this.lastLoad = () => this.loadList(page, selectLast);
    return this.guard(async () => {
      const query = { ...this.browse.query, page: page ?? this.browse.query.page };
      const result = await this.client.listPairs(query);
      this.browse = loadPage({ ...this.browse, query }, result, selectLast);
    });
  }

  private openDetail(pairId: string): Promise<void> {
    this.lastLoad = () => this.openDetail(pairId);
    return this.guard(async () => {
      const detail = await this.client.getPair(pairId);
      this.detail = detail;
      this.view = "detail";
      this.zoom = resetZoom();
      this.form = this.formFrom(detail.annotation);
      this.formErrors = null;
      this.serverError = null;
      this.savedSeq = null;
      this.dirty = false;
    });
  }

  private formFrom(annotation: AnnotationOut | null): AnnotationForm {
    if (annotation === null) {
      return emptyForm();
    }
    const bySlot = [...annotation.questions].sort(
      (a, b) => a.image_slot - b.image_slot,
    );
    return {
      author: annotation.author,
      status: annotation.status as Status,
      patterns: [...annotation.patterns],
      questions: [
        {
          text: bySlot[0]?.text ?? "",
          options: [...(bySlot[0]?.options ?? ["", ""])],
          correctIndex: bySlot[0]?.correct_index ?? null,
        },
        {
          text: bySlot[1]?.text ?? "",
          options: [...(bySlot[1]?.options ?? ["", ""])],
          correctIndex: bySlot[1]?.correct_index ?? null,
        },
      ],
    };
  }

  // ----- navigation ---------------------------------------------------

  private confirmLeave(): boolean {
    return (
      !this.dirty ||
      window.confirm("Discard unsaved annotation changes on this pair?")
    );
  }

  private applyMove(move: Move): void {
    if (move.kind === "select") {
      this.browse = withSelection(this.browse, move.index);
      if (this.view === "detail") {
        const item = this.browse.items[move.index];
        if (item) {
          void this.openDetail(item.pair_id);
          return;
        }
      }
      this.render();
    } else if (move.kind === "page") {
      void this.loadList(move.page, move.selectLast).then(() => {
        if (this.view === "detail") {
          const item = this.browse.items[this.browse.selected];
          if (item) {
            void this.openDetail(item.pair_id);
          }
        }
      });
    }
  }

  private onKey(event: KeyboardEvent): void {
    if (isTypingTarget(event.target) || this.exportOpen) {
      return;
    }
    const action = keyAction(event.key, this.view);
    if (action === null) {
      return;
    }
    event.preventDefault();
    switch (action.kind) {
      case "next":
      case "prev": {
        if (this.view === "detail" && !this.confirmLeave()) {
          return;
        }
        const move =
          action.kind === "next"
            ? selectNext(this.browse)
            : selectPrev(this.browse);
        this.applyMove(move);
        break;
      }
      case "open": {
        const item = this.browse.items[this.browse.selected];
        if (item) {
          void this.openDetail(item.pair_id);
        }
        break;
      }
      case "back":
        this.closeDetail();
        break;
      case "zoom":
        this.zoom = zoomBy(this.zoom, action.factor);
        this.render();
        break;
      case "zoomReset":
        this.zoom = resetZoom();
        this.render();
        break;
    }
  }

  private closeDetail(): void {
    if (!this.confirmLeave()) {
      return;
    }
    this.view = "list";
    this.detail = null;
    this.form = null;
    this.dirty = false;
    this.render();
  }

  // ----- saving -------------------------------------------------------

  private async save(): Promise<void> {
    if (this.detail === null || this.form === null) {
      return;
    }
    const errors = validateForm(this.form);
    this.formErrors = errors;
    this.serverError = null;
    if (!isValid(errors)) {
      this.render();
      return;
    }
    const pairId = this.detail.pair_id;
    if (!this.tracker.begin(pairId)) {
      return; // a save for this pair is already on the wire
    }
    this.render();
    try {
      const ack = await this.client.putAnnotation(
        pairId,
        toRequestBody(this.form),
      );
      // state changes only now, with the server's word in hand
      this.detail = { ...this.detail, annotation: ack, annotation_status: ack.status };
      this.browse = applyAck(this.browse, pairId, ack.status);
      this.savedSeq = ack.seq;
      this.dirty = false;
      this.banner = null;
    } catch (err) {
      const placement = describeError(err);
      if (placement.kind === "banner") {
        this.banner = placement.message;
      } else {
        this.serverError = placement.message;
      }
    } finally {
      this.tracker.finish(pairId);
    }
    this.render();
  }

  // ----- export -------------------------------------------------------

  private async openExport(): Promise<void> {
    this.exportOpen = true;
    this.exportPayload = null;
    this.acceptedTotal = null;
    this.render();
    await this.guard(async () => {
      const accepted = await this.client.listPairs({
        page: 1,
        size: 1,
        sort: "index",
        status: "accepted",
      });
      this.acceptedTotal = accepted.total;
      if (accepted.total > 0) {
        this.exportPayload = await this.client.exportBenchmark();
      }
    });
  }

  private downloadExport(): void {
    if (this.exportPayload === null) {
      return;
    }
    // Verbatim service bytes; the summary text is display only.
    const blob = new Blob([this.exportPayload.bytes as BlobPart], {
      type: "application/json",
    });
    const url = URL.createObjectURL(blob);
    const link = h("a", { href: url, download: "benchmark.json" });
    link.click();
    URL.revokeObjectURL(url);
  }

  // ----- rendering ----------------------------------------------------

  private render(): void {
    this.root.replaceChildren(
      this.renderBanner(),
      this.renderHeader(),
      this.view === "list" ? this.renderList() : this.renderDetail(),
      this.exportOpen ? this.renderExport() : h("div"),
    );
  }

  private renderBanner(): HTMLElement {
    if (this.banner === null) {
      return h("div");
    }
    return h(
      "div",
      { class: "banner", role: "alert" },
      h("span", {}, this.banner),
      h(
        "button",
        { onclick: () => void this.lastLoad() },
        "Retry",
      ),
    );
  }

  private renderHeader(): HTMLElement {
    const sort = h(
      "select",
      {
        onchange: (event) => {
          const value = (event.target as HTMLSelectElement).value;
          this.browse.query.sort = value === "index" ? "index" : "gap";
          void this.loadList(1);
        },
      },
      h("option", { value: "gap" }, "largest gap first"),
      h("option", { value: "index" }, "corpus order"),
    ) as HTMLSelectElement;
    sort.value = this.browse.query.sort;

    const filter = h(
      "select",
      {
        onchange: (event) => {
          this.browse.query.status = (event.target as HTMLSelectElement)
            .value as StatusFilter;
          void this.loadList(1);
        },
      },
      ...["any", "none", "draft", "accepted", "rejected"].map((s) =>
        h("option", { value: s }, s === "none" ? "unreviewed" : s),
      ),
    ) as HTMLSelectElement;
    filter.value = this.browse.query.status;

    return h(
      "header",
      {},
      h("h1", {}, "pair curation"),
      h("div", { class: "controls" }, sort, filter,
        h("button", { onclick: () => void this.openExport() }, "Export")),
    );
  }

  private renderList(): HTMLElement {
    if (this.browse.items.length === 0) {
      const message =
        this.browse.query.status === "any"
          ? "no pairs on this page"
          : `no ${this.browse.query.status === "none" ? "unreviewed" : this.browse.query.status} pairs`;
      return h("main", {}, h("p", { class: "empty" }, message));
    }
    const cards = this.browse.items.map((item, index) =>
      this.renderCard(item, index === this.browse.selected),
    );
    return h(
      "main",
      {},
      h("div", { class: "cards" }, ...cards),
      this.renderPager(),
    );
  }

  private renderCard(item: PairSummary, selected: boolean): HTMLElement {
    return h(
      "article",
      {
        class: selected ? "card selected" : "card",
        onclick: () => void this.openDetail(item.pair_id),
      },
      h(
        "div",
        { class: "card-images" },
        pairImage(item.thumb_urls[0] ?? "", item.image_id_i, "thumb"),
        pairImage(item.thumb_urls[1] ?? "", item.image_id_j, "thumb"),
      ),
      h(
        "div",
        { class: "card-meta" },
        h("span", { class: "pair-id" }, item.pair_id),
        h("span", {}, `gap ${formatGap(item.gap)}`),
        statusBadge(item.annotation_status),
      ),
    );
  }

  private renderPager(): HTMLElement {
    const { page, size } = this.browse.query;
    const pages = Math.max(1, Math.ceil(this.browse.total / size));
    return h(
      "nav",
      { class: "pager" },
      h(
        "button",
        { disabled: page <= 1, onclick: () => void this.loadList(page - 1) },
        "previous",
      ),
      h("span", {}, `page ${page} of ${pages} (${this.browse.total} pairs)`),
      h(
        "button",
        { disabled: page >= pages, onclick: () => void this.loadList(page + 1) },
        "next",
      ),
    );
  }

  private renderDetail(): HTMLElement {
    const detail = this.detail;
    if (detail === null) {
      return h("main", {}, h("p", {}, "loading"));
    }
    const transform = zoomTransform(this.zoom);
    const viewer = h(
      "div",
      { class: "viewer" },
      ...[0, 1].map((slot) => {
        const image = pairImage(
          detail.image_urls[slot] ?? "",
          slot === 0 ? detail.image_id_i : detail.image_id_j,
          "full",
        );
        image.style.transform = transform;
        const frame = h("div", { class: "frame" }, image);
        frame.addEventListener("wheel", (event) => {
          event.preventDefault();
          const wheel = event as WheelEvent;
          this.zoom = zoomBy(this.zoom, wheel.deltaY < 0 ? 1.25 : 0.8);
          this.render();
        });
        frame.addEventListener("pointermove", (event) => {
          const pointer = event as PointerEvent;
          if (pointer.buttons === 1) {
            this.zoom = panBy(this.zoom, pointer.movementX, pointer.movementY);
            this.render();
          }
        });
        return frame;
      }),
    );
    return h(
      "main",
      {},
      h(
        "div",
        { class: "detail-head" },
        h("button", { onclick: () => this.closeDetail() }, "back"),
        h("h2", {}, detail.pair_id),
        h(
          "span",
          { class: "sims" },
          `sim_a ${formatSim(detail.sim_a)}  sim_b ${formatSim(detail.sim_b)}  gap ${formatGap(detail.gap)}`,
        ),
        statusBadge(detail.annotation_status),
      ),
      viewer,
      this.renderForm(),
    );
  }

  private renderForm(): HTMLElement {
    const form = this.form;
    if (form === null) {
      return h("div");
    }
    const errors = this.formErrors;
    const markDirty = () => {
      this.dirty = true;
      this.savedSeq = null;
    };

    const questionBlock = (slot: 0 | 1): HTMLElement => {
      const q = form.questions[slot];
      const qErrors = errors?.questions[slot];
      const optionRow = (option: string, index: number): HTMLElement =>
        h(
          "div",
          { class: "option-row" },
          h("input", {
            type: "radio",
            name: `correct-${slot}`,
            checked: q.correctIndex === index,
            onchange: () => {
              q.correctIndex = index;
              markDirty();
            },
            title: "correct option",
          }),
          h("input", {
            type: "text",
            value: option,
            placeholder: `option ${index + 1}`,
            oninput: (event) => {
              q.options[index] = (event.target as HTMLInputElement).value;
              markDirty();
            },
          }),
        );
      const rows = q.options.map(optionRow);
      return h(
        "fieldset",
        { class: "question" },
        h("legend", {}, `question about image ${slot + 1}`),
        h("textarea", {
          rows: "2",
          placeholder: "What does this image show?",
          oninput: (event) => {
            q.text = (event.target as HTMLTextAreaElement).value;
            markDirty();
          },
        }, q.text),
        qErrors?.text ? h("p", { class: "field-error" }, qErrors.text) : null,
        ...rows,
        qErrors?.options
          ? h("p", { class: "field-error" }, qErrors.options)
          : null,
        qErrors?.correctIndex
          ? h("p", { class: "field-error" }, qErrors.correctIndex)
          : null,
        h(
          "button",
          {
            type: "button",
            onclick: () => {
              if (q.options.length < 4) {
                q.options.push("");
                markDirty();
                this.render();
              }
            },
          },
          "add option",
        ),
      );
    };

    const patternBoxes = PATTERNS.map((pattern) =>
      h(
        "label",
        { class: "pattern" },
        h("input", {
          type: "checkbox",
          checked: form.patterns.includes(pattern),
          onchange: (event) => {
            const on = (event.target as HTMLInputElement).checked;
            form.patterns = on
              ? [...form.patterns, pattern]
              : form.patterns.filter((p) => p !== pattern);
            markDirty();
          },
        }),
        PATTERN_TITLES[pattern],
      ),
    );

    const statusRadio = (value: Status): HTMLElement =>
      h(
        "label",
        { class: "status-choice" },
        h("input", {
          type: "radio",
          name: "status",
          checked: form.status === value,
          onchange: () => {
            form.status = value;
            markDirty();
          },
        }),
        value,
      );

    const saving =
      this.detail !== null && this.tracker.saving(this.detail.pair_id);

    return h(
      "form",
      {
        class: "annotation",
        onsubmit: (event) => {
          event.preventDefault();
          void this.save();
        },
      },
      h(
        "div",
        { class: "author-row" },
        h("input", {
          type: "text",
          value: form.author,
          placeholder: "author",
          oninput: (event) => {
            form.author = (event.target as HTMLInputElement).value;
            markDirty();
          },
        }),
        errors?.author ? h("p", { class: "field-error" }, errors.author) : null,
      ),
      h("div", { class: "questions" }, questionBlock(0), questionBlock(1)),
      h("div", { class: "patterns" }, ...patternBoxes),
      errors?.patterns
        ? h("p", { class: "field-error" }, errors.patterns)
        : null,
      h(
        "div",
        { class: "form-foot" },
        statusRadio("draft"),
        statusRadio("accepted"),
        statusRadio("rejected"),
        h(
          "button",
          { type: "submit", disabled: saving },
          saving ? "saving" : "save",
        ),
        this.savedSeq !== null
          ? h("span", { class: "saved" }, `saved (seq ${this.savedSeq})`)
          : null,
        this.dirty ? h("span", { class: "dirty" }, "unsaved changes") : null,
      ),
      this.serverError !== null
        ? h("p", { class: "server-error" }, this.serverError)
        : null,
    );
  }

  private renderExport(): HTMLElement {
    const body: (Node | string)[] = [];
    if (this.acceptedTotal === null) {
      body.push(h("p", {}, "counting accepted pairs"));
    } else if (this.acceptedTotal === 0) {
      body.push(
        h("p", {}, "Nothing accepted yet."),
        h(
          "button",
          { disabled: true, title: "accept at least one pair first" },
          "Download benchmark",
        ),
      );
    } else if (this.exportPayload !== null) {
      const summary = summarizeExport(this.exportPayload.doc);
      const histogram = Object.entries(summary.histogram)
        .sort(([a], [b]) => a.localeCompare(b))
        .map(([pattern, count]) =>
          h("li", {}, `${pattern}: ${count}`),
        );
      body.push(
        h("p", {}, summaryLine(summary)),
        h("ul", { class: "histogram" }, ...histogram),
        h(
          "button",
          { onclick: () => this.downloadExport() },
          "Download benchmark",
        ),
      );
    } else {
      body.push(h("p", {}, "fetching export"));
    }
    return h(
      "div",
      { class: "export-overlay" },
      h(
        "div",
        { class: "export-panel" },
        h("h2", {}, "export"),
        ...body,
        h(
          "button",
          {
            class: "close",
            onclick: () => {
              this.exportOpen = false;
              this.render();
            },
          },
          "close",
        ),
      ),
    );
  }
}

export function mount(root: HTMLElement, baseUrl = ""): App {
  const app = new App(root, new ApiClient(baseUrl));
  void app.start();
  return app;
}
