"""Document preparation for judging: byte truncation, HTML cleaning, and
topic-term highlighting.

Cleaning is a tolerant single pass over the markup (stdlib
``html.parser``): script/style/embedded-object elements vanish with their
content, chrome elements such as forms are unwrapped so their text
survives, event-handler and inline-style attributes are stripped, and
everything else is re-emitted escaped. The pass is idempotent and
preserves the visible text stream exactly.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from html import escape
from html.parser import HTMLParser

from .model import Topic

MAX_DOC_BYTES = 262_144  # 256 KB

# Elements whose content is not rendered text; removed together with
# everything inside them. <title> is also captured, not shown.
_DROP_WITH_CONTENT = frozenset(
    {"script", "style", "noscript", "iframe", "object", "applet", "template", "title"}
)
# Void chrome elements: removed outright (they cannot hold text).
_REMOVE_VOID = frozenset({"link", "meta", "base", "param", "source", "track", "input", "embed"})
# Elements unwrapped (tag dropped, content kept) so no text is lost.
_UNWRAP = frozenset({"html", "head", "body", "form", "button"})

_VOID_ELEMENTS = frozenset(
    {"area", "base", "br", "col", "embed", "hr", "img", "input",
     "link", "meta", "param", "source", "track", "wbr"}
)

STOPWORDS = frozenset(
    """a about above after again all an and any are as at be because been
    before being below between both but by could did do does doing down
    during each few for from further had has have having he her here hers
    him his how i if in into is it its itself just me more most my no nor
    not now of off on once only or other our out over own same she should
    so some such than that the their them then there these they this those
    through to too under until up very was we were what when where which
    while who whom why will with you your""".split()
)

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


@dataclass(frozen=True)
class CleanDocument:
    doc_id: str
    title: str
    body: str
    highlight_terms: tuple[str, ...]
    original_bytes: int
    truncated: bool


def truncate_doc(data: bytes) -> tuple[bytes, bool]:
    """Cut to 256 KB without splitting a UTF-8 sequence.

    The cut backs up past any partial multi-byte sequence straddling the
    limit; inputs at or under the limit pass through untouched.
    """
    if len(data) <= MAX_DOC_BYTES:
        return data, False
    end = MAX_DOC_BYTES
    start = end
    while start > 0 and end - start < 4 and (data[start - 1] & 0xC0) == 0x80:
        start -= 1
    if start > 0:
        lead = data[start - 1]
        if lead >= 0xC0:
            continuations_needed = 1 if lead < 0xE0 else 2 if lead < 0xF0 else 3
            if end - start < continuations_needed:
                end = start - 1
    return data[:end], True


def _format_attrs(attrs: list[tuple[str, str | None]]) -> str:
    parts = []
    for name, value in attrs:
        if name.startswith("on") or name == "style":
            continue
        if (
            name in ("href", "src")
            and value is not None
            and value.strip().lower().startswith("javascript:")
        ):
            continue
        if value is None:
            parts.append(f" {name}")
        else:
            parts.append(f' {name}="{escape(value, quote=True)}"')
    return "".join(parts)


class _Sanitizer(HTMLParser):
    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self.out: list[str] = []
        self.title_parts: list[str] = []
        self._drop_stack: list[str] = []
        self._title_seen = False

    def handle_starttag(self, tag: str, attrs: list[tuple[str, str | None]]) -> None:
        if tag in _DROP_WITH_CONTENT:
            self._drop_stack.append(tag)
            return
        if self._drop_stack:
            return
        if tag in _REMOVE_VOID or tag in _UNWRAP:
            return
        self.out.append(f"<{tag}{_format_attrs(attrs)}>")

    def handle_endtag(self, tag: str) -> None:
        if tag in _DROP_WITH_CONTENT:
            # close the innermost matching open element; stray closers are
            # ignored so they cannot swallow the rest of the document
            for i in range(len(self._drop_stack) - 1, -1, -1):
                if self._drop_stack[i] == tag:
                    del self._drop_stack[i]
                    if tag == "title":
                        self._title_seen = True
                    break
            return
        if self._drop_stack:
            return
        if tag in _REMOVE_VOID or tag in _UNWRAP or tag in _VOID_ELEMENTS:
            return
        self.out.append(f"</{tag}>")

    def handle_startendtag(self, tag: str, attrs: list[tuple[str, str | None]]) -> None:
        if self._drop_stack or tag in _DROP_WITH_CONTENT:
            return
        if tag in _REMOVE_VOID or tag in _UNWRAP:
            return
        if tag in _VOID_ELEMENTS:
            self.out.append(f"<{tag}{_format_attrs(attrs)}>")
        else:
            self.out.append(f"<{tag}{_format_attrs(attrs)}></{tag}>")

    def handle_data(self, data: str) -> None:
        if self._drop_stack:
            if self._drop_stack[-1] == "title" and not self._title_seen:
                self.title_parts.append(data)
            return
        self.out.append(escape(data, quote=False))

    # comments, declarations and processing instructions are dropped


def sanitize_html(html: str) -> str:
    """Strip scripts, styles, embedded objects, chrome elements, and
    event-handler/style attributes; keep the visible text verbatim."""
    parser = _Sanitizer()
    parser.feed(html)
    parser.close()
    return "".join(parser.out)


def _sanitize_with_title(html: str) -> tuple[str, str]:
    parser = _Sanitizer()
    parser.feed(html)
    parser.close()
    return "".join(parser.title_parts).strip(), "".join(parser.out)


class _TextExtractor(HTMLParser):
    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self.parts: list[str] = []
        self._drop_stack: list[str] = []

    def handle_starttag(self, tag: str, attrs: list[tuple[str, str | None]]) -> None:
        if tag in _DROP_WITH_CONTENT:
            self._drop_stack.append(tag)

    def handle_endtag(self, tag: str) -> None:
        if tag in _DROP_WITH_CONTENT:
            for i in range(len(self._drop_stack) - 1, -1, -1):
                if self._drop_stack[i] == tag:
                    del self._drop_stack[i]
                    break

    def handle_data(self, data: str) -> None:
        if not self._drop_stack:
            self.parts.append(data)


def visible_text(html: str) -> str:
    """The text a reader would see: everything outside non-rendered
    elements, entity references resolved."""
    parser = _TextExtractor()
    parser.feed(html)
    parser.close()
    return "".join(parser.parts)


def extract_terms(topic: Topic) -> tuple[str, ...]:
    """Highlightable tokens from the topic title and level descriptions:
    lowercased alphanumeric tokens minus stopwords."""
    if topic.is_noise:
        return ()
    text = " ".join([topic.title, *(d for _, d in topic.levels)])
    terms = {
        tok.lower() for tok in _TOKEN_RE.findall(text) if tok.lower() not in STOPWORDS
    }
    return tuple(sorted(terms))


class _Highlighter(HTMLParser):
    def __init__(self, terms: frozenset[str]) -> None:
        super().__init__(convert_charrefs=True)
        self.terms = terms
        self.out: list[str] = []

    def handle_starttag(self, tag: str, attrs: list[tuple[str, str | None]]) -> None:
        self.out.append(f"<{tag}{_format_attrs(attrs)}>")

    def handle_endtag(self, tag: str) -> None:
        if tag not in _VOID_ELEMENTS:
            self.out.append(f"</{tag}>")

    def handle_startendtag(self, tag: str, attrs: list[tuple[str, str | None]]) -> None:
        if tag in _VOID_ELEMENTS:
            self.out.append(f"<{tag}{_format_attrs(attrs)}>")
        else:
            self.out.append(f"<{tag}{_format_attrs(attrs)}></{tag}>")

    def handle_data(self, data: str) -> None:
        pos = 0
        for m in _TOKEN_RE.finditer(data):
            if m.group().lower() in self.terms:
                self.out.append(escape(data[pos : m.start()], quote=False))
                self.out.append(f"<mark>{escape(m.group(), quote=False)}</mark>")
                pos = m.end()
        self.out.append(escape(data[pos:], quote=False))


def highlight_terms(body: str, topic: Topic) -> str:
    """Wrap whole-token, case-insensitive occurrences of the topic's terms
    in <mark> markers. Noise topics have no terms: the body passes through
    unchanged."""
    terms = frozenset(extract_terms(topic))
    if not terms:
        return body
    parser = _Highlighter(terms)
    parser.feed(body)
    parser.close()
    return "".join(parser.out)


def clean_document(doc_id: str, raw: bytes, topic: Topic | None = None) -> CleanDocument:
    """Full preparation pipeline: truncate, decode, sanitize, and (when a
    topic is given) highlight its terms."""
    cut, truncated = truncate_doc(raw)
    text = cut.decode("utf-8", errors="replace")
    title, body = _sanitize_with_title(text)
    terms: tuple[str, ...] = ()
    if topic is not None:
        terms = extract_terms(topic)
        body = highlight_terms(body, topic)
    return CleanDocument(
        doc_id=doc_id,
        title=title,
        body=body,
        highlight_terms=terms,
        original_bytes=len(raw),
        truncated=truncated,
    )
