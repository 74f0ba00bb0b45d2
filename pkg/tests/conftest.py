"""Shared fixtures: synthetic exercise corpus and a service runner."""

from __future__ import annotations

import socket
import threading
import time
from contextlib import contextmanager

import pytest

# Synthetic exercise documents in the three shapes the portal uses:
# multiple-choice, fill-in-the-blank and drag-and-drop.  Inline tags wrap
# whole tokens; all documents are well-formed XML and also valid lenient HTML.
EXERCISE_FIXTURES = [
    # multiple-choice
    '<exercise type="multiple_choice"><question>Kolik nohou má <b>pavouk</b>?</question>'
    "<choice>Osm nohou.</choice><choice>Šest nohou.</choice></exercise>",
    '<exercise type="multiple_choice"><question>Která planeta je <i>největší</i>?</question>'
    "<choice>Jupiter je největší planeta.</choice><choice>Mars.</choice></exercise>",
    '<exercise type="multiple_choice"><question>Hálky na rostlinách vytváří <b>žlabatky</b>.</question>'
    "<choice>Pravda.</choice><choice>Nepravda.</choice></exercise>",
    '<exercise type="multiple_choice"><question>Čím dýchají <em>ryby</em>?</question>'
    "<choice>Ryby dýchají žábrami.</choice><choice>Plícemi.</choice></exercise>",
    '<exercise type="multiple_choice"><question>Jaké je hlavní město?</question>'
    '<choice title="Správná odpověď">Praha je hlavní město.</choice><choice>Brno.</choice></exercise>',
    '<exercise type="multiple_choice"><question>Vyber <b>správnou</b> odpověď. Voda vře při 100 stupních.</question>'
    "<choice>Ano.</choice><choice>Ne.</choice></exercise>",
    '<exercise type="multiple_choice"><question>Larvy se jmenují <i>ponravy</i>.</question>'
    "<choice>Souhlasím.</choice><choice>Nesouhlasím.</choice></exercise>",
    # fill-in-the-blank
    '<exercise type="fill_in"><prompt>Doplň chybějící slovo.</prompt>'
    "<sentence>Včely sbírají <b>nektar</b> z květů.</sentence></exercise>",
    '<exercise type="fill_in"><prompt>Doplň větu. Použij správný tvar.</prompt>'
    "<sentence>Řeka <i>teče</i> do moře.</sentence></exercise>",
    '<exercise type="fill_in"><prompt>Doplň text o fotosyntéze.</prompt>'
    "<sentence>Rostliny přijímají <b>oxid uhličitý</b> a vydávají <b>kyslík</b>.</sentence></exercise>",
    '<exercise type="fill_in"><prompt>Doplň chemickou značku.</prompt>'
    "<sentence>Značka zlata je <span>Au</span>.</sentence></exercise>",
    '<exercise type="fill_in"><prompt>Dopiš číslo.</prompt>'
    "<sentence>Pavouci mají <strong>osm</strong> nohou.</sentence></exercise>",
    '<exercise type="fill_in"><prompt>Doplň jméno pohoří.</prompt>'
    "<sentence>Nejvyšší hora Krkonoš je <b>Sněžka</b>. Měří 1603 metrů.</sentence></exercise>",
    # drag-and-drop
    '<exercise type="drag_drop"><instruction>Přetáhni pojmy na správná místa.</instruction>'
    "<item>Srdce pumpuje <b>krev</b>.</item><item>Plíce slouží k <i>dýchání</i>.</item></exercise>",
    '<exercise type="drag_drop"><instruction>Seřaď planety podle velikosti.</instruction>'
    "<item>Merkur</item><item>Země</item><item>Jupiter</item></exercise>",
    '<exercise type="drag_drop"><instruction>Spoj zvíře a potravu.</instruction>'
    "<item>Krtek žere <b>larvy</b>.</item><item>Včela sbírá <b>pyl</b>.</item></exercise>",
    '<exercise type="drag_drop"><instruction>Přiřaď <u>hlavní města</u> ke státům.</instruction>'
    "<item>Praha patří k Česku.</item><item>Kyjev patří k Ukrajině.</item></exercise>",
    '<exercise type="drag_drop"><instruction>Roztřiď látky. Pozor na skupenství.</instruction>'
    "<item>Led je <b>pevná</b> látka.</item><item>Pára je <i>plynná</i> látka.</item></exercise>",
    # mixed / edge shapes
    '<exercise type="multiple_choice"><question>Text s <b><i>vnořeným</i></b> značením.</question>'
    "<choice>Odpověď jedna.</choice></exercise>",
    '<exercise type="fill_in"><prompt>Např. tzv. obojživelníci žijí ve vodě.</prompt>'
    "<sentence>Žába je obojživelník.</sentence></exercise>",
    '<exercise type="drag_drop"><instruction>Obrázek: <span class="bold">sopka</span>.</instruction>'
    '<item><img src="volcano.png" alt="Sopka chrlí lávu."/>Popiš obrázek.</item></exercise>',
    '<exercise type="multiple_choice"><question>Otázka se <sub>dolním</sub> a <sup>horním</sup> indexem.</question>'
    "<choice>Voda je H2O.</choice></exercise>",
]


@pytest.fixture(scope="session")
def exercise_corpus() -> list[bytes]:
    return [doc.encode("utf-8") for doc in EXERCISE_FIXTURES]


def free_port() -> int:
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


@contextmanager
def run_service(config, port: int | None = None):
    """Run the real service with uvicorn in a thread; yields the base URL."""
    import uvicorn

    from markmt.service import create_app

    port = port or free_port()
    app = create_app(config)
    uv_config = uvicorn.Config(app, host="127.0.0.1", port=port, log_level="error")
    server = uvicorn.Server(uv_config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.time() + 10
    while not server.started:
        if time.time() > deadline:
            raise RuntimeError("service did not start")
        time.sleep(0.02)
    try:
        yield f"http://127.0.0.1:{port}"
    finally:
        server.should_exit = True
        thread.join(timeout=5)
