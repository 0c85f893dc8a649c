import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from toposearch import ToponymRecord, ToponymSubtype, ToponymType

# The worked-example record; the sources citation carries the full 79-char
# value whose elided form appears in the reference corpus.
RANTAMAK_FIELDS = {
    "id": "1530",
    "toponym_type": "Toponym",
    "toponym_subtype": "Oikonym",
    "geographical_object": "Село",
    "name_rus": "Рантамак",
    "name_tat": "Рантамак",
    "etymology": "Топоним произошел от ойконима «Рангазар-Тамак».",
    "geographical_location": "Расположено на р. Мелля, в 21 км к востоку от с. Сарманово.",
    "sources": "Әхмәтьянов Р.Г. Татар теленең этимологик сүзлеге. Казан: Мәгариф — Вакыт, 2015.",
    "latitude": 55.205461,
    "longitude": 52.881862,
}


@pytest.fixture
def rantamak() -> ToponymRecord:
    return ToponymRecord(
        id="1530",
        toponym_type=ToponymType.TOPONYM,
        toponym_subtype=ToponymSubtype.OIKONYM,
        geographical_object="Село",
        name_rus="Рантамак",
        name_tat="Рантамак",
        etymology="Топоним произошел от ойконима «Рангазар-Тамак».",
        geographical_location="Расположено на р. Мелля, в 21 км к востоку от с. Сарманово.",
        sources="Әхмәтьянов Р.Г. Татар теленең этимологик сүзлеге. Казан: Мәгариф — Вакыт, 2015.",
        latitude=55.205461,
        longitude=52.881862,
        lat_text="55.205461",
        lon_text="52.881862",
    )
