#include "ssf/tracker/features.hpp"

#include <cctype>
#include <sstream>
#include <stdexcept>

#include "ssf/rdf/vocab.hpp"

namespace ssf::tracker {

using rdf::Iri;
using rdf::Term;
using rdf::TimestampedFact;
using rdf::Triple;
namespace vocab = rdf::vocab;

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(cur);
  for (std::string& f : fields) {
    while (!f.empty() && std::isspace(static_cast<unsigned char>(f.front()))) f.erase(f.begin());
    while (!f.empty() && std::isspace(static_cast<unsigned char>(f.back()))) f.pop_back();
  }
  return fields;
}

std::string format_number(double v) {
  std::ostringstream out;
  out << v;
  std::string s = out.str();
  if (s.find('.') == std::string::npos && s.find('e') == std::string::npos &&
      s.find("inf") == std::string::npos && s.find("nan") == std::string::npos)
    s += ".0";
  return s;
}

}  // namespace

std::vector<DetectionRecord> parse_detection_csv(std::istream& in) {
  std::vector<DetectionRecord> records;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> f = split_csv_line(line);
    if (line_no == 1 && !f.empty() && f[0] == "frame") continue;  // optional header
    if (f.size() < 7)
      throw std::runtime_error("detections line " + std::to_string(line_no) +
                               ": expected frame,x,y,w,h,score,label[,appearance_id]");
    DetectionRecord r;
    try {
      r.frame = std::stoll(f[0]);
      r.box = Box{std::stod(f[1]), std::stod(f[2]), std::stod(f[3]), std::stod(f[4])};
      r.score = std::stod(f[5]);
    } catch (const std::exception&) {
      throw std::runtime_error("detections line " + std::to_string(line_no) + ": bad number");
    }
    r.label = f[6];
    if (f.size() > 7) r.appearance_id = f[7];
    if (r.frame < 0 || !r.box.valid() || r.score < 0 || r.score > 1 || r.label.empty())
      throw std::runtime_error("detections line " + std::to_string(line_no) + ": malformed record");
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<DetectionRecord> parse_detection_csv(const std::string& text) {
  std::istringstream in(text);
  return parse_detection_csv(in);
}

FeatureExtractorOptions::FeatureExtractorOptions()
    : sensor(vocab::dflt("cam1")), detector(vocab::dflt("Yolo")) {}

FeatureExtractor::FeatureExtractor(FeatureExtractorOptions options)
    : options_(std::move(options)) {}

rdf::Iri FeatureExtractor::mint_box() { return Iri{vocab::dflt(("b" + std::to_string(++box_counter_)).c_str())}; }

std::vector<TimestampedFact> FeatureExtractor::extract(
    const std::vector<DetectionRecord>& records, rdf::Tick tick,
    const std::vector<GalleryEntry>& gallery, std::vector<MintedDetection>* minted) {
  std::vector<TimestampedFact> facts;
  auto emit = [&](Term s, const std::string& p, Term o) {
    facts.push_back(TimestampedFact{Triple{std::move(s), Iri{p}, std::move(o)}, tick});
  };

  // Image observation group.
  Term image = Term::iri(vocab::dflt(("image" + std::to_string(tick)).c_str()));
  Term image_qt = Term::quoted(image, Iri{rdf::kRdfType}, Term::iri(vocab::kImage2D));
  emit(image_qt, rdf::kRdfType, Term::iri(vocab::kObservation));
  emit(image_qt, vocab::kMadeBySensor, Term::iri(options_.sensor));

  for (const DetectionRecord& r : records) {
    if (!r.box.valid() || r.score < 0 || r.score > 1)
      throw std::runtime_error("malformed detection record");
    Iri det{vocab::dflt(("det" + std::to_string(++det_counter_)).c_str())};
    Iri box = mint_box();
    if (minted) minted->push_back(MintedDetection{det, box, r});

    Term qt = Term::quoted(Term(Term::Repr{det}), Iri{vocab::kDet}, Term(Term::Repr{box}));
    emit(qt, rdf::kRdfType, Term::iri(vocab::kDetection));
    emit(qt, vocab::kHasSimpleResult, Term::literal(r.label));
    emit(qt, vocab::kScore, Term::literal(format_number(r.score)));
    emit(qt, vocab::kIsDetectionOf, image);
    emit(qt, vocab::kUsedProcedure, Term::iri(options_.detector));

    Term box_term(Term::Repr{box});
    emit(box_term, vocab::kBoxX, Term::decimal(format_number(r.box.x)));
    emit(box_term, vocab::kBoxY, Term::decimal(format_number(r.box.y)));
    emit(box_term, vocab::kBoxW, Term::decimal(format_number(r.box.w)));
    emit(box_term, vocab::kBoxH, Term::decimal(format_number(r.box.h)));
    emit(box_term, rdf::kRdfType, Term::iri(vocab::dflt(r.label.c_str())));

    // Appearance continuity against remembered boxes of ended tracklets.
    if (!r.appearance_id.empty()) {
      for (const GalleryEntry& g : gallery) {
        if (g.appearance_id != r.appearance_id) continue;
        Term match_qt = Term::quoted(box_term, Iri{vocab::kVMatch}, Term(Term::Repr{g.box}));
        emit(match_qt, vocab::kScore, Term::decimal(format_number(options_.vmatch_score)));
      }
    }
  }
  return facts;
}

}  // namespace ssf::tracker
