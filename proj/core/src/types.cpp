#include "liftcurve/types.hpp"

#include <algorithm>
#include <cctype>
#include <string>

namespace liftcurve {

namespace {

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

std::string_view sex_code(Sex sex) { return sex == Sex::Female ? "F" : "M"; }

std::optional<Sex> parse_sex(std::string_view code) {
  if (code == "F") return Sex::Female;
  if (code == "M") return Sex::Male;
  return std::nullopt;
}

std::string_view family_name(ModelFamily family) {
  return family == ModelFamily::VonBertalanffy ? "vonbertalanffy" : "logistic";
}

std::optional<ModelFamily> parse_family(std::string_view name) {
  const std::string lower = lowercase(name);
  if (lower == "vonbertalanffy" || lower == "vb") return ModelFamily::VonBertalanffy;
  if (lower == "logistic") return ModelFamily::Logistic;
  return std::nullopt;
}

std::string_view dataset_name(DatasetVariant dataset) {
  return dataset == DatasetVariant::Original ? "original" : "resampled";
}

std::optional<DatasetVariant> parse_dataset(std::string_view name) {
  const std::string lower = lowercase(name);
  if (lower == "original") return DatasetVariant::Original;
  if (lower == "resampled") return DatasetVariant::Resampled;
  return std::nullopt;
}

}  // namespace liftcurve
