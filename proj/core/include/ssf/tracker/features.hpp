#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ssf/rdf/term.hpp"
#include "ssf/tracker/box.hpp"

namespace ssf::tracker {

/// One detector output row: frame,x,y,w,h,score,label[,appearance_id].
struct DetectionRecord {
  rdf::Tick frame = 0;
  Box box;
  double score = 0.0;
  std::string label = "car";
  std::string appearance_id;  // optional precomputed visual-descriptor id
};

std::vector<DetectionRecord> parse_detection_csv(std::istream& in);
std::vector<DetectionRecord> parse_detection_csv(const std::string& text);

/// A remembered box of an ended tracklet, available for appearance matching.
struct GalleryEntry {
  rdf::Iri box;
  rdf::Iri object;
  rdf::Iri tracklet;
  std::string appearance_id;
  rdf::Tick end_tick = 0;
};

struct MintedDetection {
  rdf::Iri det;
  rdf::Iri box;
  DetectionRecord record;
};

struct FeatureExtractorOptions {
  std::string sensor;     // IRI of the observing camera
  std::string detector;   // IRI of the detection procedure
  double vmatch_score = 0.9;
  FeatureExtractorOptions();
};

/// Lifts detection records into the stream's fact shape: an image observation
/// group, one detection group per record, box geometry and typing facts, and
/// visual-match facts against the gallery. Box and detection IRIs are minted
/// from monotone counters.
class FeatureExtractor {
 public:
  explicit FeatureExtractor(FeatureExtractorOptions options = {});

  std::vector<rdf::TimestampedFact> extract(const std::vector<DetectionRecord>& records,
                                            rdf::Tick tick,
                                            const std::vector<GalleryEntry>& gallery = {},
                                            std::vector<MintedDetection>* minted = nullptr);

  /// Next box IRI, shared with the tracker so predicted boxes get fresh names.
  rdf::Iri mint_box();

 private:
  FeatureExtractorOptions options_;
  long box_counter_ = 0;
  long det_counter_ = 0;
};

}  // namespace ssf::tracker
