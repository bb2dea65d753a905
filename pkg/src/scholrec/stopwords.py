"""Shipped stopword profiles for language inference and key-term filtering.

Lists hold the most frequent function words per language. Single-letter
words are omitted because the tokenizer drops tokens shorter than two
characters anyway.
"""

from __future__ import annotations

STOPWORDS: dict[str, frozenset[str]] = {
    "en": frozenset(
        """
        the of and to in is that it was for on are as with his they at be
        this have from or had by not but what all were we when your can
        said there an each which she do how their if will up other about
        out many then them these so some her would like him into has more
        two see no way could my than been who its did get may our such
        also any most after between both during only over same under while
        where should because through does against those however thus very
        being here must might without within upon among therefore
        """.split()
    ),
    "de": frozenset(
        """
        der die das und in zu den von mit sich des auf ist im dem nicht
        ein eine als auch es an werden aus er hat dass sie nach wird bei
        einer um am sind noch wie einem über einen so zum war haben nur
        oder aber vor zur bis mehr durch man sein wurde wenn sei kann
        dieser unter wir soll ich eines jedoch sowie ihre dann seiner alle
        wieder gegen vom können schon ohne damit zwischen immer beim diese
        seinem ob dieses einige ihr dazu also hatte deren
        """.split()
    ),
    "fr": frozenset(
        """
        le la les de des du un une et en dans que qui pour sur se pas plus
        par avec tout son autre mais nous comme ou si leur bien encore
        aussi cette ces aux ils elle au ce il ne je sont est ont cela
        entre sans deux même fait être avoir donc après avant sous alors
        ainsi peut dont très votre vous nos toute tous toutes lors chez
        lui ses notre quel quelle celui celle ceux peu chaque où quand
        comment parce était été
        """.split()
    ),
    "es": frozenset(
        """
        de la que el en los del se las por un para con no una su al lo
        como más pero sus le ya este porque esta entre cuando muy sin
        sobre también me hasta hay donde quien desde todo nos durante
        todos uno les ni contra otros ese eso ante ellos esto antes
        algunos qué unos yo otro otras otra él tanto esa estos mucho
        quienes nada muchos cual poco ella estar estas algunas algo
        nosotros
        """.split()
    ),
    "it": frozenset(
        """
        di che la il un per in una sono mi si lo ma le ci se come da non
        più ha questo quella con del della nel al dei delle gli alla dal
        sul anche essere quando dove chi cosa molto senza fatto questa
        queste dopo prima tra fra sia stato stata ogni tutto tutti alcuni
        quindi però nella loro suo sua suoi noi voi essi ed degli alle era
        erano
        """.split()
    ),
    "pt": frozenset(
        """
        de que em um para com não uma os no se na por mais as dos como mas
        foi ao ele das tem seu sua ou ser quando muito há nos já está eu
        também só pelo pela até isso ela entre era depois sem mesmo aos
        ter seus quem nas me esse eles estão você tinha foram essa num nem
        suas meu às minha têm numa pelos elas havia seja qual será nós
        tenho lhe deles essas esses pelas este fosse dele
        """.split()
    ),
}

SUPPORTED_LANGUAGES = tuple(sorted(STOPWORDS))

ALL_STOPWORDS: frozenset[str] = frozenset().union(*STOPWORDS.values())
