import slspectra.families.utils.checks
import slspectra.families.utils.diagnostics
