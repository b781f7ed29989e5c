#pragma once

#include "modgate/errors.hpp"
#include "modgate/text.hpp"
#include "modgate/digest.hpp"
#include "modgate/taxonomy.hpp"
#include "modgate/corpus.hpp"
#include "modgate/promptkit.hpp"
#include "modgate/response.hpp"
#include "modgate/modelgw.hpp"
#include "modgate/outparse.hpp"
#include "modgate/evalkit.hpp"
#include "modgate/records.hpp"
#include "modgate/errlab.hpp"
#include "modgate/cli.hpp"
