"""
Shared plumbing for the simulator's management commands.

Every command reads model parameters the same way (flags, optionally on top
of a key=value parameter file given with --config), writes its data with
--output/--format and ends with a one-line summary on stdout.

Exit codes: 0 success, 1 domain error (instability, non-convergence, failed
check), 2 usage or configuration error.
"""

import logging

from django.core.exceptions import ValidationError
from django.core.management.base import BaseCommand, CommandError

from dmpaSim.exceptions import SimulationError
from dmpaSim.exporters import write_text
from dmpaSim.forms import LabFrameForm, RotatingFrameForm, is_lab_frame, load_param_file, merge_inputs

logger = logging.getLogger('dmpaSim.commands')

# argparse dest -> form field
PARAMETER_FLAGS = {
    'gamma': 'gamma',
    'chi': 'chi',
    'delta': 'delta',
    'mu': 'mu',
    'eta': 'eta',
    'N': 'N',
    'n_bad': 'n_bad',
    'quality_q': 'quality_Q',
    'scheme': 'scheme',
    'detuning_sign': 'detuning_sign',
    'omega_m': 'omega_m',
    'k0': 'k0',
    'kr': 'kr',
}


def describe_validation_error(error):
    if hasattr(error, 'error_dict'):
        return '; '.join(f"{field}: {' '.join(messages)}" for field, messages in sorted(error.message_dict.items()))
    return '; '.join(error.messages)


def parse_floats(text, name):
    """Comma-separated list of numbers"""
    try:
        values = [float(part) for part in str(text).split(',') if part.strip()]
    except ValueError:
        raise ValidationError({name: [f"expected comma-separated numbers, got '{text}'"]})
    if not values:
        raise ValidationError({name: ['at least one value is required']})
    return values


class SimulationCommand(BaseCommand):
    """Base class: parameter flags, output flags and error translation"""

    formats = ('csv', 'json')
    uses_parameters = True

    def add_arguments(self, parser):
        if self.uses_parameters:
            group = parser.add_argument_group('model parameters (rates in units of gamma unless --absolute)')
            group.add_argument('--config', help='key=value parameter file; flags override its values')
            group.add_argument('--scheme', type=str.lower, choices=['dmpa', 'bae'])
            group.add_argument('--gamma', type=float)
            group.add_argument('--chi', type=float)
            group.add_argument('--delta', type=float,
                               help='explicit detuning; without it DMPA uses delta = detuning_sign * chi')
            group.add_argument('--mu', type=float)
            group.add_argument('--eta', type=float)
            group.add_argument('--N', type=float, dest='N')
            group.add_argument('--n-bad', type=float, dest='n_bad')
            group.add_argument('--quality-q', type=float, dest='quality_q')
            group.add_argument('--detuning-sign', type=int, choices=[-1, 1], dest='detuning_sign')
            group.add_argument('--absolute', action='store_true', help='rates are absolute, --gamma required')

            lab = parser.add_argument_group('lab frame (converted to rotating-frame rates)')
            lab.add_argument('--omega-m', type=float, dest='omega_m')
            lab.add_argument('--k0', type=float)
            lab.add_argument('--kr', type=float)

        if self.formats:
            parser.add_argument('--output', '-o', help="output file ('-' for stdout)")
            parser.add_argument('--format', choices=self.formats, default=self.formats[0])

        self.add_command_arguments(parser)

    def add_command_arguments(self, parser):
        pass

    # ----------------------------------------
    # parameters
    # ----------------------------------------

    def get_params(self, options):
        """(RotatingFrameParams, Scheme) from --config plus flags"""
        file_values = load_param_file(options['config']) if options.get('config') else {}
        flags = {field: options.get(dest) for dest, field in PARAMETER_FLAGS.items()}
        values = merge_inputs(file_values, flags)

        if is_lab_frame(values):
            form = LabFrameForm(data=values)
        else:
            values['absolute'] = options.get('absolute', False)
            form = RotatingFrameForm(data=values)
        params, scheme = form.get_params()
        logger.debug(f"parameters: {params} ({scheme})")
        return params, scheme

    # ----------------------------------------
    # output
    # ----------------------------------------

    def emit(self, text, options):
        """Write `text` to --output; '-' sends it to stdout"""
        path = options.get('output')
        if not path:
            return None
        if path == '-':
            self.stdout.write(text, ending='')
            return '-'
        return write_text(text, path)

    def summary(self, message, options, style='SUCCESS'):
        stream = self.stderr if options.get('output') == '-' else self.stdout
        stream.write(getattr(self.style, style)(message))

    # ----------------------------------------
    # execution
    # ----------------------------------------

    def handle(self, *args, **options):
        try:
            self.run(options)
        except ValidationError as e:
            message = describe_validation_error(e)
            logger.error(f"{self.command_name}: invalid input: {message}")
            raise CommandError(message, returncode=2)
        except ValueError as e:
            logger.error(f"{self.command_name}: {str(e)}")
            raise CommandError(str(e), returncode=2)
        except SimulationError as e:
            logger.error(f"{self.command_name} failed: {str(e)}", exc_info=True)
            raise CommandError(f"{type(e).__name__}: {str(e)}", returncode=1)

    @property
    def command_name(self):
        return self.__module__.rsplit('.', 1)[-1]

    def run(self, options):
        raise NotImplementedError
