"""Regenerates the PDF fixtures used by the ingest tests.

Run from this directory: python3 make_fixtures.py
"""
from reportlab.lib.pagesizes import A4
from reportlab.pdfbase import pdfmetrics
from reportlab.pdfbase.ttfonts import TTFont
from reportlab.pdfgen import canvas
from PIL import Image

DEJAVU = "/usr/share/fonts/truetype/dejavu/DejaVuSans.ttf"


def text_pdf():
    c = canvas.Canvas("grammar.pdf", pagesize=A4, invariant=1)
    c.setFont("Helvetica", 12)
    c.drawString(72, 720, "Grammar rules.")
    c.save()


def multipage_pdf():
    pdfmetrics.registerFont(TTFont("DejaVu", DEJAVU))
    c = canvas.Canvas("multipage.pdf", pagesize=A4, invariant=1)
    c.setFont("DejaVu", 12)
    c.drawString(72, 720, "Page one: Übung macht den Meister.")
    c.drawString(72, 700, "Second line (with parens).")
    c.showPage()
    c.setFont("Helvetica", 12)
    c.drawString(72, 720, "Page two: nouns name things.")
    c.save()


def image_only_pdf():
    Image.new("RGB", (64, 64), (200, 30, 30)).save("scan.png")
    c = canvas.Canvas("image_only.pdf", pagesize=A4, invariant=1)
    c.drawImage("scan.png", 72, 500, width=200, height=200)
    c.save()


if __name__ == "__main__":
    text_pdf()
    multipage_pdf()
    image_only_pdf()
    import os
    os.remove("scan.png")
