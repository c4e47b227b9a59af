#pragma once

#include <string>

namespace ssf::rdf::ns {
inline constexpr const char* kDefault = "http://example.org/ns#";
inline constexpr const char* kSsr = "http://example.org/ssr#";
inline constexpr const char* kSosa = "http://www.w3.org/ns/sosa/";
inline constexpr const char* kRdf = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
inline constexpr const char* kShacl = "http://www.w3.org/ns/shacl#";
inline constexpr const char* kXsd = "http://www.w3.org/2001/XMLSchema#";
}  // namespace ssf::rdf::ns

namespace ssf::rdf::vocab {

inline std::string sosa(const char* local) { return std::string(ns::kSosa) + local; }
inline std::string dflt(const char* local) { return std::string(ns::kDefault) + local; }
inline std::string ssr(const char* local) { return std::string(ns::kSsr) + local; }

inline const std::string kResultTime = sosa("resultTime");
inline const std::string kMadeBySensor = sosa("madeBySensor");
inline const std::string kHasSimpleResult = sosa("hasSimpleResult");
inline const std::string kUsedProcedure = sosa("usedProcedure");
inline const std::string kIsSampleOf = sosa("isSampleOf");
inline const std::string kObservation = sosa("Observation");

inline const std::string kDet = dflt("det");
inline const std::string kTrk = dflt("trk");
inline const std::string kTrklet = dflt("trklet");
inline const std::string kScore = dflt("score");
inline const std::string kIsDetectionOf = dflt("isDetectionOf");
inline const std::string kVMatch = dflt("vMatch");
inline const std::string kEnds = dflt("ends");
inline const std::string kInFov = dflt("inFOV");
inline const std::string kEnters = dflt("enters");
inline const std::string kDetection = dflt("Detection");
inline const std::string kTracklet = dflt("Tracklet");
inline const std::string kImage2D = dflt("Image2D");
inline const std::string kKalmanFilter = dflt("KalmanFilter");
inline const std::string kFoV = ssr("FoV");

inline const std::string kBoxX = dflt("x");
inline const std::string kBoxY = dflt("y");
inline const std::string kBoxW = dflt("w");
inline const std::string kBoxH = dflt("h");

}  // namespace ssf::rdf::vocab
