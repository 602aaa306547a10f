#include "nerkit/train/synth.hpp"

#include <string>
#include <vector>

#include "nerkit/error.hpp"
#include "nerkit/rng.hpp"

namespace nerkit::train {

namespace {

using Strings = std::vector<std::string>;

const Strings kFirstNames{"Ahmet", "Mehmet", "Ayşe", "Fatma", "Meliha", "Emre", "Zeynep", "Can", "Elif", "Burak",
                          "Selin", "Murat", "Deniz", "Hakan", "Gül", "Oğuz", "Ebru", "Kemal", "Şule", "İlker",
                          "Tolga", "Nesrin", "Cem", "Özlem", "Serkan", "Yıldız", "Barış", "Esra", "Uğur", "Derya"};
const Strings kSurnames{"Yılmaz", "Kaya", "Demir", "Şahin", "Çelik", "Yıldırım", "Aydın", "Öztürk", "Arslan",
                        "Doğan", "Kılıç", "Aslan", "Çetin", "Kara", "Koç", "Kurt", "Özdemir", "Düzağaç", "Erdem",
                        "Polat", "Güneş", "Tantuğ", "Aksoy", "Bulut", "Korkmaz"};
const Strings kCities{"Ankara", "İstanbul", "İzmir", "Bursa", "Antalya", "Konya", "Adana", "Trabzon", "Eskişehir",
                      "Samsun", "Kayseri", "Mersin", "Diyarbakır", "Erzurum", "Van", "Malatya", "Sivas", "Edirne",
                      "Muğla", "Çanakkale", "Berlin", "Paris", "Londra", "Bakü", "Atina"};
const Strings kRegions{"Karadeniz", "Ege", "Akdeniz", "Marmara", "Anadolu"};
const Strings kOrgHeads{"Türk Hava Yolları", "TCDD", "TÜBİTAK", "Merkez Bankası", "Kızılay", "ASELSAN", "TRT",
                        "Milli Eğitim Bakanlığı", "Sağlık Bakanlığı", "Anadolu Ajansı", "Borsa İstanbul"};
const Strings kOrgSuffixes{"Holding", "Üniversitesi", "Belediyesi", "Vakfı", "Derneği", "Spor Kulübü", "Bankası",
                           "Sanat Galerisi", "Hastanesi"};
const Strings kSyllables{"ka", "ra", "me", "li", "sa", "tu", "ne", "ba", "şi", "gö", "ke", "lo", "dı", "ya",
                         "zer", "han", "tan", "gül", "nur", "er", "can", "ay", "baş", "kal", "öz", "ten"};
const Strings kOrgSyllables{"tek", "net", "sis", "tar", "kom", "pa", "mak", "sa", "ro", "vi", "ka", "der"};

// Case suffixes written after an apostrophe, with a pseudo morph tag.
struct Suffix {
  std::string text;
  std::string morph;
};
const std::vector<Suffix> kSuffixes{{"", "Nom"},    {"'da", "Loc"}, {"'de", "Loc"}, {"'ın", "Gen"},
                                    {"'nin", "Gen"}, {"'a", "Dat"}, {"'e", "Dat"},  {"'dan", "Abl"},
                                    {"'ı", "Acc"},  {"'yi", "Acc"}, {"'la", "Ins"}};

struct Entity {
  std::string type;
  Strings tokens;
};

std::string capitalize_syllables(Rng& rng, const Strings& syllables, std::size_t lo, std::size_t hi) {
  std::string s;
  const std::size_t n = lo + rng.index(hi - lo + 1);
  for (std::size_t i = 0; i < n; ++i) s += rng.pick(syllables);
  // ASCII-initial syllables only get upper-cased; others keep their shape.
  if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s;
}

class Generator {
 public:
  explicit Generator(const SynthOptions& o) : opt_(o), rng_(o.seed) {}

  data::Corpus run() {
    data::Corpus out;
    while (out.size() < opt_.sentences) out.push_back(sentence());
    return out;
  }

 private:
  SynthOptions opt_;
  Rng rng_;

  bool novel() { return rng_.bernoulli(opt_.novel_name_rate); }

  Entity person() {
    Entity e{"PERSON", {}};
    e.tokens.push_back(novel() ? capitalize_syllables(rng_, kSyllables, 2, 3) : rng_.pick(kFirstNames));
    if (rng_.bernoulli(0.7))
      e.tokens.push_back(novel() ? capitalize_syllables(rng_, kSyllables, 2, 3) + (rng_.bernoulli(0.3) ? "oğlu" : "")
                                 : rng_.pick(kSurnames));
    return e;
  }

  Entity location() {
    Entity e{"LOCATION", {}};
    const auto r = rng_.index(10);
    if (r < 6)
      e.tokens.push_back(novel() ? capitalize_syllables(rng_, kSyllables, 2, 3) + (rng_.bernoulli(0.5) ? "köy" : "")
                                 : rng_.pick(kCities));
    else if (r < 8)
      e.tokens = {rng_.pick(kRegions), "Bölgesi"};
    else
      e.tokens = {rng_.pick(Strings{"Kuzey", "Güney", "Doğu", "Batı"}), rng_.pick(kCities)};
    return e;
  }

  Entity organization() {
    Entity e{"ORGANIZATION", {}};
    const auto r = rng_.index(10);
    auto append = [&](const std::string& phrase) {
      std::size_t start = 0;
      while (start < phrase.size()) {
        auto sp = phrase.find(' ', start);
        if (sp == std::string::npos) sp = phrase.size();
        e.tokens.push_back(phrase.substr(start, sp - start));
        start = sp + 1;
      }
    };
    if (r < 3) {
      append(rng_.pick(kOrgHeads));
    } else if (r < 6) {
      e.tokens.push_back(rng_.bernoulli(0.5) ? rng_.pick(kCities) : rng_.pick(kSurnames));
      append(rng_.pick(kOrgSuffixes));
    } else if (r < 8) {
      e.tokens.push_back(capitalize_syllables(rng_, kOrgSyllables, 2, 3));
      append(rng_.pick(Strings{"Holding", "A.Ş.", "Teknoloji", "Yazılım", "Grubu"}));
    } else {
      std::string acr;
      for (std::size_t i = 0, n = 3 + rng_.index(2); i < n; ++i) acr += static_cast<char>('A' + rng_.index(26));
      e.tokens.push_back(acr);
    }
    return e;
  }

  Entity of(const std::string& kind) {
    if (kind == "PER") return person();
    if (kind == "LOC") return location();
    return organization();
  }

  // Template items: plain words, or a slot "{PER}" / "{LOC'da}" style with an
  // optional case suffix attached to the last entity token.
  const std::vector<Strings>& templates() {
    static const std::vector<Strings> t{
        {"{PER}", "dün", "{LOC'da}", "bir", "konuşma", "yaptı", "."},
        {"{ORG}", ",", "{LOC'da}", "yeni", "bir", "şube", "açtı", "."},
        {"{PER}", "ile", "{PER}", "{ORG'de}", "bir", "araya", "geldi", "."},
        {"{PER'ın}", "resimleri", "7", "Ekim'e", "dek", "{ORG'nde}", "sergilenecek", "."},
        {"Bakan", "{PER}", "bugün", "{LOC'a}", "gitti", "."},
        {"{ORG}", "genel", "müdürü", "{PER}", "açıklama", "yaptı", "."},
        {"{LOC'dan}", "gelen", "heyet", "{ORG'nin}", "toplantısına", "katıldı", "."},
        {"Geçen", "hafta", "{PER}", "ve", "{PER}", "{LOC'da}", "evlendi", "."},
        {"{ORG}", "yönetimi", ",", "{PER'ı}", "yeni", "başkan", "olarak", "seçti", "."},
        {"Pazartesi", "günü", "{LOC'da}", "yağmur", "bekleniyor", "."},
        {"{PER}", ",", "{ORG'dan}", "istifa", "ettiğini", "duyurdu", "."},
        {"Türkiye", "Kupası", "finali", "{LOC'da}", "oynanacak", "."},
        {"Muhabirimiz", "{PER}", "{LOC'dan}", "bildiriyor", "."},
        {"{ORG'nin}", "hisseleri", "Salı", "günü", "yüzde", "3", "yükseldi", "."},
        {"Ünlü", "yazar", "{PER'ın}", "yeni", "kitabı", "çıktı", "."},
        {"Yarın", "sabah", "saat", "10'da", "başlayacak", "toplantıya", "herkes", "davetli", "."},
        {"{LOC}", "ile", "{LOC}", "arasındaki", "yol", "kapandı", "."},
        {"{PER}", "{ORG'nde}", "çalışmaya", "başladı", "."},
        {"Haber", "{ORG}", "tarafından", "doğrulandı", "."},
        {"{PER'a}", "göre", "{LOC}", "ekonomisi", "büyüyor", "."},
        {"Cumhurbaşkanı", "{PER}", "{ORG'ni}", "ziyaret", "etti", "."},
        {"Bu", "yıl", "{LOC'da}", "turist", "sayısı", "arttı", "."},
    };
    return t;
  }

  static std::string morph_for(const std::string& surface, const std::string& tag) {
    if (surface == "." || surface == ",") return surface + "+Punc";
    if (!surface.empty() && surface[0] >= '0' && surface[0] <= '9') return surface + "+Num+Card";
    if (tag != "O") return surface + "+Noun+Prop+A3sg";
    return surface + "+Noun+A3sg";
  }

  void push(data::LabeledSentence& s, const std::string& surface, const std::string& tag,
            const std::string& morph = {}) {
    data::Token t{surface, std::nullopt, tag};
    if (opt_.morph) t.morph = morph.empty() ? morph_for(surface, tag) : morph;
    s.tokens.push_back(std::move(t));
  }

  data::LabeledSentence sentence() {
    const Strings& tpl = rng_.pick(templates());
    data::LabeledSentence s;
    for (const auto& item : tpl) {
      if (item.size() < 3 || item.front() != '{') {
        push(s, item, "O");
        continue;
      }
      const std::string body = item.substr(1, item.size() - 2);
      const auto apos = body.find('\'');
      const std::string kind = body.substr(0, apos == std::string::npos ? body.size() : apos);
      std::string suffix = apos == std::string::npos ? std::string() : body.substr(apos);
      // Vary the case suffix now and then so suffix strings alone do not fix the tag.
      std::string case_tag = "Nom";
      if (!suffix.empty() && rng_.bernoulli(0.3)) suffix = rng_.pick(kSuffixes).text;
      for (const auto& sx : kSuffixes)
        if (sx.text == suffix) case_tag = sx.morph;
      if (!suffix.empty() && case_tag == "Nom") case_tag = "Loc";
      Entity e = of(kind);
      for (std::size_t i = 0; i < e.tokens.size(); ++i) {
        const bool last = i + 1 == e.tokens.size();
        const std::string tag = (i == 0 ? "B-" : "I-") + e.type;
        const std::string surface = e.tokens[i] + (last ? suffix : "");
        push(s, surface, tag, e.tokens[i] + "+Noun+Prop+A3sg" + (last ? "+" + case_tag : std::string()));
      }
    }
    return s;
  }
};

}  // namespace

data::Corpus synth_corpus(const SynthOptions& options) {
  if (options.sentences == 0) throw ConfigError("synthetic corpus size must be positive");
  if (!(options.novel_name_rate >= 0.0 && options.novel_name_rate <= 1.0))
    throw ConfigError("novel_name_rate must be in [0, 1]");
  return Generator(options).run();
}

}  // namespace nerkit::train
