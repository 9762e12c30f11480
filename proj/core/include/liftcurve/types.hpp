#pragma once

#include <optional>
#include <string_view>

namespace liftcurve {

enum class Sex { Female, Male };

enum class ModelFamily { VonBertalanffy, Logistic };

// Which dataset a set of fitted coefficients came from.
enum class DatasetVariant { Original, Resampled };

// "F" / "M", the upstream column encoding.
std::string_view sex_code(Sex sex);
std::optional<Sex> parse_sex(std::string_view code);

// "vonbertalanffy" / "logistic".
std::string_view family_name(ModelFamily family);
// Accepts "vonbertalanffy", "vb", "logistic" (case-insensitive).
std::optional<ModelFamily> parse_family(std::string_view name);

std::string_view dataset_name(DatasetVariant dataset);
std::optional<DatasetVariant> parse_dataset(std::string_view name);

}  // namespace liftcurve
