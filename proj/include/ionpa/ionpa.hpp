#pragma once

#include "ionpa/config.hpp"
#include "ionpa/constants.hpp"
#include "ionpa/couplings.hpp"
#include "ionpa/drive.hpp"
#include "ionpa/errors.hpp"
#include "ionpa/floquet.hpp"
#include "ionpa/io.hpp"
#include "ionpa/modes.hpp"
#include "ionpa/parametric.hpp"
#include "ionpa/trap.hpp"
