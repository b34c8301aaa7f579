#include <algorithm>
#include <string>
#include <string_view>
#include <utility>

#include "ratesculpt/planner.hpp"

// General American transcriptions in the style espeak-ng prints with --ipa.
// The /ɑ/ words of the minimal-pair set (bought, doll) use the merged
// cot-caught vowel so they land in the tense class.

namespace ratesculpt {
namespace {

constexpr std::pair<std::string_view, std::string_view> kLexicon[] = {
    // minimal pairs
    {"peel", "pˈiːl"}, {"pill", "pˈɪl"},
    {"scene", "sˈiːn"}, {"sin", "sˈɪn"},
    {"sheep", "ʃˈiːp"}, {"ship", "ʃˈɪp"},
    {"beat", "bˈiːt"}, {"bit", "bˈɪt"},
    {"bean", "bˈiːn"}, {"bin", "bˈɪn"},
    {"keyed", "kˈiːd"}, {"kid", "kˈɪd"},
    {"reap", "ɹˈiːp"}, {"rip", "ɹˈɪp"},
    {"fool", "fˈuːl"}, {"full", "fˈʊl"},
    {"cooed", "kˈuːd"}, {"could", "kˈʊd"},
    {"pool", "pˈuːl"}, {"pull", "pˈʊl"},
    {"wooed", "wˈuːd"}, {"wood", "wˈʊd"},
    {"shooed", "ʃˈuːd"}, {"should", "ʃˈʊd"},
    {"cot", "kˈɑːt"}, {"cut", "kˈʌt"},
    {"knot", "nˈɑːt"}, {"nut", "nˈʌt"},
    {"hot", "hˈɑːt"}, {"hut", "hˈʌt"},
    {"bought", "bˈɑːt"}, {"but", "bˈʌt"},
    {"cop", "kˈɑːp"}, {"cup", "kˈʌp"},
    {"doll", "dˈɑːl"}, {"dull", "dˈʌl"},
    {"music", "mjˈuːzɪk"},
    // sentence frames
    {"a", "ɐ"},
    {"about", "ɐbˈaʊt"},
    {"after", "ˈæftɚ"},
    {"again", "ɐɡˈɛn"},
    {"aloud", "ɐlˈaʊd"},
    {"and", "ænd"},
    {"asked", "ˈæskt"},
    {"at", "æt"},
    {"before", "bᵻfˈoːɹ"},
    {"below", "bᵻlˈoʊ"},
    {"board", "bˈoːɹd"},
    {"book", "bˈʊk"},
    {"break", "bɹˈeɪk"},
    {"card", "kˈɑːɹd"},
    {"clearly", "klˈɪɹli"},
    {"conversation", "kˌɑːnvɚsˈeɪʃən"},
    {"during", "dˈʊɹɪŋ"},
    {"end", "ˈɛnd"},
    {"expected", "ɛkspˈɛktᵻd"},
    {"first", "fˈɜːst"},
    {"for", "fɔːɹ"},
    {"form", "fˈɔːɹm"},
    {"friend", "fɹˈɛnd"},
    {"he", "hiː"},
    {"heard", "hˈɜːd"},
    {"her", "hɜː"},
    {"his", "hɪz"},
    {"i", "ˈaɪ"},
    {"i'm", "aɪm"},
    {"in", "ɪn"},
    {"it", "ɪt"},
    {"kept", "kˈɛpt"},
    {"large", "lˈɑːɹdʒ"},
    {"later", "lˈeɪɾɚ"},
    {"letters", "lˈɛɾɚz"},
    {"list", "lˈɪst"},
    {"me", "miː"},
    {"meant", "mˈɛnt"},
    {"mentioning", "mˈɛnʃənɪŋ"},
    {"my", "maɪ"},
    {"next", "nˈɛkst"},
    {"note", "nˈoʊt"},
    {"on", "ɑːn"},
    {"pad", "pˈæd"},
    {"page", "pˈeɪdʒ"},
    {"pointed", "pˈɔɪntᵻd"},
    {"pretty", "pɹˈɪɾi"},
    {"read", "ɹˈɛd"},
    {"repeat", "ɹᵻpˈiːt"},
    {"said", "sˈɛd"},
    {"saw", "sˈɔː"},
    {"say", "sˈeɪ"},
    {"screen", "skɹˈiːn"},
    {"she", "ʃiː"},
    {"showed", "ʃˈoʊd"},
    {"sign", "sˈaɪn"},
    {"slowly", "slˈoʊli"},
    {"sure", "ʃˈʊɹ"},
    {"talk", "tˈɔːk"},
    {"talked", "tˈɔːkt"},
    {"teacher", "tˈiːtʃɚ"},
    {"that", "ðæt"},
    {"the", "ðə"},
    {"them", "ðɛm"},
    {"then", "ðˈɛn"},
    {"they", "ðeɪ"},
    {"this", "ðɪs"},
    {"time", "tˈaɪm"},
    {"to", "tə"},
    {"twice", "twˈaɪs"},
    {"typed", "tˈaɪpt"},
    {"using", "jˈuːzɪŋ"},
    {"was", "wʌz"},
    {"we", "wiː"},
    {"where", "wˈɛɹ"},
    {"while", "wˈaɪl"},
    {"whispered", "wˈɪspɚd"},
    {"with", "wɪð"},
    {"word", "wˈɜːd"},
    {"written", "ɹˈɪɾən"},
    {"wrote", "ɹˈoʊt"},
    {"you", "juː"},
    // common extras
    {"an", "æn"},
    {"are", "ɑːɹ"},
    {"be", "biː"},
    {"can", "kæn"},
    {"did", "dˈɪd"},
    {"do", "dˈuː"},
    {"here", "hˈɪɹ"},
    {"is", "ɪz"},
    {"it's", "ɪts"},
    {"just", "dʒˈʌst"},
    {"know", "nˈoʊ"},
    {"not", "nˈɑːt"},
    {"now", "nˈaʊ"},
    {"of", "ʌv"},
    {"one", "wˈʌn"},
    {"please", "plˈiːz"},
    {"so", "sˈoʊ"},
    {"some", "sʌm"},
    {"there", "ðɛɹ"},
    {"think", "θˈɪŋk"},
    {"two", "tˈuː"},
    {"very", "vˈɛɹi"},
    {"what", "wʌt"},
    {"would", "wʊd"},
    {"yes", "jˈɛs"},
    {"no", "nˈoʊ"},
    {"flags", "flˈæɡz"},
    {"hear", "hˈɪɹ"},
};

}  // namespace

std::optional<std::string> lexicon_lookup(std::string_view word) {
    const auto it = std::find_if(std::begin(kLexicon), std::end(kLexicon), [&](const auto& e) { return e.first == word; });
    if (it == std::end(kLexicon)) return std::nullopt;
    return std::string(it->second);
}

std::vector<std::string> lexicon_words() {
    std::vector<std::string> out;
    for (const auto& [w, _] : kLexicon) out.emplace_back(w);
    return out;
}

}  // namespace ratesculpt
