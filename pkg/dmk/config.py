import yaml
import pkgutil

f = pkgutil.get_data('dmk', 'data/config.yml')
config = yaml.safe_load(f)
